//! The global circuit: every amoebot joins all of its pins into one class.

use crate::engine::{InitView, Protocol, StepCtx};

/// One-round protocol that installs the global circuit.
pub struct EstablishGlobalCircuit;

impl Protocol for EstablishGlobalCircuit {
    type State = bool;
    type Output = ();

    fn init(&self, _: &InitView) -> bool {
        false
    }

    fn step(&self, done: &mut bool, ctx: &mut StepCtx<'_>) {
        ctx.use_global_config();
        *done = true;
    }

    fn output(&self, done: &bool) -> Option<()> {
        done.then_some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Simulation, Structure};
    use crate::grid::GridCoord;
    use crate::harness::generators::gen_random_connected;

    fn circuits_after(s: Structure) -> (usize, Vec<u32>) {
        let mut sim = Simulation::new(s, &EstablishGlobalCircuit);
        sim.run(5).unwrap();
        let p = sim.partition();
        (p.num_blocks, p.block.clone())
    }

    #[test]
    fn single_amoebot_has_no_pins() {
        let s = Structure::uniform(&[GridCoord::new(0, 0)], 2, 0).unwrap();
        assert_eq!(circuits_after(s).0, 0);
    }

    #[test]
    fn path_of_three() {
        let c = [GridCoord::new(0, 0), GridCoord::new(1, 0), GridCoord::new(2, 0)];
        let s = Structure::uniform(&c, 2, 0).unwrap();
        assert_eq!(s.num_physical_pins(), 4);
        assert_eq!(circuits_after(s).0, 1);
    }

    #[test]
    fn random_structures_form_one_circuit() {
        for seed in 0..20 {
            let c = gen_random_connected(1 + seed as usize * 7, seed);
            let s = Structure::uniform(&c, 3, seed).unwrap();
            let (blocks, _) = circuits_after(s);
            assert_eq!(blocks, usize::from(seed > 0));
        }
    }
}
