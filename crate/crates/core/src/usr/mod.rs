//! Recognition of scaled, rotated and translated copies of a shape.
//!
//! Four phases run back to back, each ending in a vote on the global
//! circuit:
//!
//! 1. Every amoebot gathers its neighborhood and compares it against the
//!    representations with scale below 4.
//! 2. Each amoebot looks up its 2-neighborhood in the boundary table.
//! 3. Corners iteratively beep along the axes to triangulate the structure.
//!    The triangulation has to finish after exactly as many iterations as it
//!    does for the shape itself.
//! 4. Corners gather the triangles along the triangle sides and compare the
//!    result with the shape.
//!
//! The shape is read in the amoebots' common chirality.

pub mod gather;
pub mod table;

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::alignment::{AlignMode, Alignment};
use crate::engine::{InitView, PinConfig, Protocol, Simulation, StepCtx, Structure};
use crate::error::{Error, Result};
use crate::grid::{Direction, GridCoord};
use crate::primitives::connect_bonds;
use crate::shapes::{edge, is_minimal, triangulation_iteration_bound, Edge, Shape, Transformation, Triangle};

pub use gather::{Gather, NeighborhoodGather, TriangleGather};
pub use table::{pattern_key, BoundaryClass, BoundaryLabel, BoundaryTable, SmallScale};

/// Largest supported shape.
pub const MAX_FACES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UsrOutcome {
    pub accepted: bool,
    /// Phase (1 to 4) that reached the verdict.
    pub phase: u8,
}

/// The recognition protocol for one shape.
#[derive(Debug)]
pub struct ShapeRecognition {
    small: SmallScale,
    table: &'static BoundaryTable,
    gather_iterations: u32,
    bound: u32,
    window: u32,
    triangle_iterations: u32,
    /// Rotations of the shape, translated so the smallest anchor is the
    /// origin.
    targets: HashSet<BTreeSet<Triangle>>,
}

fn normalized(faces: &BTreeSet<Triangle>) -> BTreeSet<Triangle> {
    let Some(min) = faces.iter().map(|t| t.anchor).min() else {
        return BTreeSet::new();
    };
    faces.iter().map(|t| t.map(|p| p - min)).collect()
}

impl ShapeRecognition {
    pub fn new(shape: &Shape) -> Result<Self> {
        if shape.len() > MAX_FACES {
            return Err(Error::ShapeTooLarge(shape.len()));
        }
        if !is_minimal(shape)? {
            return Err(Error::ShapeNotMinimal);
        }
        let small = SmallScale::new(shape);
        let faces = shape.len() as u32;
        let rho = (3 * faces + 1).max(small.diameter + 1);
        let targets = (0..6)
            .map(|rot| normalized(&shape.unit_faces(&Transformation::new(GridCoord::ORIGIN, rot, 1))))
            .collect();
        Ok(ShapeRecognition {
            small,
            table: BoundaryTable::universal(),
            gather_iterations: rho - 1,
            bound: triangulation_iteration_bound(shape),
            window: faces + 2,
            triangle_iterations: faces + 1,
            targets,
        })
    }

    /// Triangulation iterations a representation needs.
    pub fn iteration_bound(&self) -> u32 {
        self.bound
    }

    fn matches(&self, maps: &[BTreeSet<Triangle>]) -> bool {
        maps.windows(2).all(|w| w[0] == w[1]) && maps.first().is_some_and(|m| self.targets.contains(&normalized(m)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
enum Stage {
    Gather,
    SmallVote,
    BoundaryVote,
    /// Global round reporting whether the last iteration added corners.
    TriangulateCheck,
    /// Corners beep along the axes.
    TriangulateBeep,
    Collect,
    FinalVote,
    Done,
}

#[derive(Clone, Debug, Serialize)]
pub struct UsrState {
    stage: Stage,
    gather: NeighborhoodGather,
    label: Option<BoundaryLabel>,
    /// Corner of the triangulation.
    pub corner: bool,
    fresh: bool,
    /// Evaluations of the triangulation loop condition so far.
    evaluations: u32,
    pub triangles: Option<TriangleGather>,
    /// This amoebot beeped in the current global vote.
    objects: bool,
    /// Round in which each phase began.
    pub starts: [Option<u64>; 4],
    outcome: Option<UsrOutcome>,
}

/// Axis lines through this amoebot. A line passes unless the amoebot is on
/// the boundary and the line leaves the boundary here; with `cut` it stops
/// at corners as well.
fn axis_joined(ctx: &StepCtx<'_>, label: &BoundaryLabel, a: usize) -> bool {
    let pair = (1u8 << a) | (1 << (a + 3));
    ctx.has_neighbor(a) && ctx.has_neighbor(a + 3) && (label.boundary == 0 || label.boundary & pair == pair)
}

fn axis_config(ctx: &StepCtx<'_>, label: &BoundaryLabel, cut: bool) -> PinConfig {
    let mut cfg = PinConfig::EMPTY;
    if !cut {
        for a in 0..3 {
            if axis_joined(ctx, label, a) {
                connect_bonds(&mut cfg, ctx.pins_per_edge(), a, a + 3);
            }
        }
    }
    cfg
}

/// Distinct axis circuits this amoebot heard a beep on.
fn circuits_heard(ctx: &StepCtx<'_>, label: &BoundaryLabel) -> usize {
    (0..3)
        .map(|a| {
            let (x, y) = (ctx.heard_any(ctx.bond_mask(a)), ctx.heard_any(ctx.bond_mask(a + 3)));
            if axis_joined(ctx, label, a) {
                (x || y) as usize
            } else {
                x as usize + y as usize
            }
        })
        .sum()
}

/// Maximal cyclic runs of set bits.
fn runs(mask: u8) -> Vec<u8> {
    if mask == 0x3f {
        return vec![0x3f];
    }
    let mut out = Vec::new();
    for start in (0..6).filter(|w| mask >> w & 1 == 1 && mask >> ((w + 5) % 6) & 1 == 0) {
        let mut run = 0u8;
        let mut w = start;
        while mask >> w & 1 == 1 {
            run |= 1 << w;
            w = (w + 1) % 6;
        }
        out.push(run);
    }
    out
}

impl UsrState {
    fn vote(&mut self, ctx: &mut StepCtx<'_>, object: bool) {
        ctx.use_global_config();
        if object {
            ctx.beep_mask(ctx.bond_pin_mask());
        }
        self.objects = object;
    }

    /// Outcome of the previous vote.
    fn objection(&self, ctx: &StepCtx<'_>) -> bool {
        self.objects || ctx.heard_anything()
    }

    fn finish(&mut self, ctx: &mut StepCtx<'_>, accepted: bool, phase: u8) {
        ctx.clear_config();
        self.stage = Stage::Done;
        self.outcome = Some(UsrOutcome { accepted, phase });
    }
}

impl ShapeRecognition {
    fn start_collect(&self, st: &mut UsrState, ctx: &mut StepCtx<'_>) {
        st.starts[3] = Some(ctx.round());
        let label = st.label.expect("labelled in phase 2");
        let faces = if st.corner { runs(label.inside) } else { Vec::new() };
        let sides = if st.corner { label.inside | rotate_left(label.inside) } else { 0 };
        st.triangles = Some(TriangleGather::new(self.window, self.triangle_iterations, &faces, sides));
        st.stage = Stage::Collect;
        self.collect(st, ctx);
    }

    fn collect(&self, st: &mut UsrState, ctx: &mut StepCtx<'_>) {
        let label = st.label.expect("labelled in phase 2");
        let cfg = axis_config(ctx, &label, st.corner);
        let tri = st.triangles.as_mut().expect("collect started");
        if tri.step(ctx, cfg) {
            let object = st.corner && !self.matches(&tri.maps);
            st.vote(ctx, object);
            st.stage = Stage::FinalVote;
        }
    }
}

/// Bonds next to a wedge: wedge `w` lies between bonds `w` and `w + 1`.
fn rotate_left(mask: u8) -> u8 {
    table::rotate_mask(mask, 1)
}

impl Protocol for ShapeRecognition {
    type State = UsrState;
    type Output = UsrOutcome;

    fn init(&self, view: &InitView) -> UsrState {
        UsrState {
            stage: Stage::Gather,
            gather: NeighborhoodGather::new(self.gather_iterations, view.neighbors),
            label: None,
            corner: false,
            fresh: false,
            evaluations: 0,
            triangles: None,
            objects: false,
            starts: [None; 4],
            outcome: None,
        }
    }

    fn step(&self, st: &mut UsrState, ctx: &mut StepCtx<'_>) {
        match st.stage {
            Stage::Gather => {
                st.starts[0].get_or_insert(ctx.round());
                if st.gather.step(ctx) {
                    let known: Vec<GridCoord> = st.gather.known.iter().copied().collect();
                    let object = !self.small.matches(&known);
                    st.vote(ctx, object);
                    st.stage = Stage::SmallVote;
                }
            }
            Stage::SmallVote => {
                if !st.objection(ctx) {
                    return st.finish(ctx, true, 1);
                }
                st.starts[1] = Some(ctx.round());
                st.label = self.table.classify(pattern_key(|p| st.gather.known.contains(&p)));
                let object = st.label.is_none();
                st.vote(ctx, object);
                st.stage = Stage::BoundaryVote;
            }
            Stage::BoundaryVote => {
                if st.objection(ctx) {
                    return st.finish(ctx, false, 2);
                }
                st.starts[2] = Some(ctx.round());
                st.corner = st.label.is_some_and(|l| l.corner);
                st.fresh = st.corner;
                st.evaluations = 1;
                let fresh = st.fresh;
                st.vote(ctx, fresh);
                st.stage = Stage::TriangulateCheck;
            }
            Stage::TriangulateCheck => {
                let added = st.objection(ctx);
                st.fresh = false;
                match (added, st.evaluations >= self.bound) {
                    // still growing at the bound, or finished too early
                    (true, true) | (false, false) => st.finish(ctx, false, 3),
                    (false, true) => self.start_collect(st, ctx),
                    (true, false) => {
                        let label = st.label.expect("labelled in phase 2");
                        ctx.set_config(axis_config(ctx, &label, false));
                        if st.corner {
                            ctx.beep_mask(ctx.bond_pin_mask());
                        }
                        st.stage = Stage::TriangulateBeep;
                    }
                }
            }
            Stage::TriangulateBeep => {
                let label = st.label.expect("labelled in phase 2");
                if !st.corner && circuits_heard(ctx, &label) >= 2 {
                    st.corner = true;
                    st.fresh = true;
                }
                st.evaluations += 1;
                let fresh = st.fresh;
                st.vote(ctx, fresh);
                st.stage = Stage::TriangulateCheck;
            }
            Stage::Collect => self.collect(st, ctx),
            Stage::FinalVote => {
                let accepted = !st.objection(ctx);
                st.finish(ctx, accepted, 4);
            }
            Stage::Done => {}
        }
    }

    fn output(&self, st: &UsrState) -> Option<UsrOutcome> {
        st.outcome
    }
}

/// Corners and sides found by the distributed triangulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FoundTriangulation {
    pub corners: BTreeSet<GridCoord>,
    pub edges: BTreeSet<Edge>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UsrReport {
    pub accepted: bool,
    pub phase: u8,
    /// Rounds of the chirality agreement run first; zero when skipped.
    pub chirality_rounds: u64,
    /// Rounds per recognition phase; phases never entered count zero.
    pub phase_rounds: [u64; 4],
    pub rounds: u64,
    /// Present once the triangulation phase completed.
    pub triangulation: Option<FoundTriangulation>,
}

fn found_triangulation(s: &Structure, states: &[UsrState]) -> FoundTriangulation {
    let corners: BTreeSet<GridCoord> = (0..s.len()).filter(|i| states[*i].corner).map(|i| s.coord(i)).collect();
    let mut edges = BTreeSet::new();
    for i in (0..s.len()).filter(|i| states[*i].corner) {
        let Some(tri) = &states[i].triangles else { continue };
        for d in (0..6).filter(|d| tri.linked >> d & 1 == 1) {
            let step = s.orientation(i).local_to_global(Direction::new(d as i64)).vector();
            let mut p = s.coord(i) + step;
            while s.contains(p) && !corners.contains(&p) {
                p = p + step;
            }
            if corners.contains(&p) {
                edges.insert(edge(s.coord(i), p));
            }
        }
    }
    FoundTriangulation { corners, edges }
}

/// Runs chirality agreement if needed, then the recognition protocol.
pub fn recognize_shape(s: Structure, shape: &Shape, max_rounds: u64) -> Result<UsrReport> {
    if s.pins_per_edge() < 2 {
        return Err(Error::InvalidConfig("shape recognition needs at least 2 pins per edge".into()));
    }
    let protocol = ShapeRecognition::new(shape)?;
    let mut s = s;
    let mut chirality_rounds = 0;
    let first = s.orientation(0).chirality;
    if s.orientations().iter().any(|o| o.chirality != first) {
        let align = Alignment { mode: AlignMode::Chirality };
        let mut sim = Simulation::new(s, &align);
        let r = sim.run(max_rounds)?;
        if !r.terminated() {
            return Err(Error::NoVerdict { phase: "chirality", rounds: r.rounds });
        }
        chirality_rounds = r.rounds;
        s = sim.into_structure();
    }
    let mut sim = Simulation::new(s, &protocol);
    let r = sim.run(max_rounds)?;
    let outcome = r
        .unanimous()
        .filter(|_| r.terminated())
        .ok_or(Error::NoVerdict { phase: "recognition", rounds: r.rounds })?;
    let (s, states) = sim.into_parts();
    let starts = states[0].starts;
    let mut phase_rounds = [0; 4];
    for p in 0..4 {
        if let Some(a) = starts[p] {
            let b = starts[p + 1..].iter().flatten().next().copied().unwrap_or(r.rounds);
            phase_rounds[p] = b - a;
        }
    }
    let triangulation = (outcome.phase == 4).then(|| found_triangulation(&s, &states));
    Ok(UsrReport {
        accepted: outcome.accepted,
        phase: outcome.phase,
        chirality_rounds,
        phase_rounds,
        rounds: r.rounds,
        triangulation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Orientation;
    use crate::harness::generators::{gen_random_connected, perturb, random_orientations, PerturbMode};
    use crate::shapes::{
        boundary_edges, is_representation, reference_triangulation, representation, Pointing, Transformation,
    };

    fn shape(faces: &[(i32, i32, Pointing)]) -> Shape {
        Shape::new(faces.iter().map(|(q, r, p)| (GridCoord::new(*q, *r), *p))).unwrap()
    }

    fn shapes() -> Vec<Shape> {
        use Pointing::*;
        vec![
            Shape::triangle(),
            shape(&[(0, 0, Up), (0, 0, Down)]),
            shape(&[(0, 0, Up), (0, 0, Down), (1, 0, Up)]),
        ]
    }

    fn structure(coords: &[GridCoord], seed: u64) -> Structure {
        let o: Vec<Orientation> = random_orientations(coords.len(), seed, false, true);
        Structure::new(coords, &o, 2, seed).unwrap()
    }

    fn recognize(sh: &Shape, coords: &[GridCoord], seed: u64) -> UsrReport {
        recognize_shape(structure(coords, seed), sh, 1_000_000).unwrap()
    }

    #[test]
    fn runs_split_at_outside_wedges() {
        assert_eq!(runs(0x3f), vec![0x3f]);
        assert_eq!(runs(0b000111), vec![0b000111]);
        assert_eq!(runs(0b100001), vec![0b100001]);
        assert_eq!(runs(0b010011), vec![0b000011, 0b010000]);
        assert!(runs(0).is_empty());
    }

    #[test]
    fn representations_are_accepted_in_the_right_phase() {
        for (n, sh) in shapes().iter().enumerate() {
            for sigma in 1..=6 {
                let rot = (sigma as u8 + n as u8) % 6;
                let t = Transformation::new(GridCoord::new(sigma - 3, 2), rot, sigma);
                let coords = representation(sh, &t);
                let r = recognize(sh, &coords, sigma as u64);
                assert!(r.accepted, "{sh} σ = {sigma}: {r:?}");
                assert_eq!(r.phase, if sigma < 4 { 1 } else { 4 });
            }
        }
    }

    #[test]
    fn triangulation_matches_the_reference() {
        for sh in shapes() {
            for (sigma, rot) in [(4, 0), (5, 3), (6, 5)] {
                let t = Transformation::new(GridCoord::new(1, -1), rot, sigma);
                let coords = representation(&sh, &t);
                let found = recognize(&sh, &coords, 9).triangulation.unwrap();
                let reference = reference_triangulation(&coords, &boundary_edges(&sh.unit_faces(&t))).unwrap();
                assert_eq!(found.corners, reference.corners, "{sh} σ = {sigma}");
                assert_eq!(found.edges, reference.edges, "{sh} σ = {sigma}");
            }
        }
    }

    #[test]
    fn rounds_do_not_depend_on_scale() {
        for sh in shapes() {
            let r4 = recognize(&sh, &representation(&sh, &Transformation::scaled(4)), 1);
            let r8 = recognize(&sh, &representation(&sh, &Transformation::new(GridCoord::new(5, 5), 2, 8)), 2);
            assert_eq!(r4.rounds, r8.rounds);
            assert_eq!(r4.phase_rounds, r8.phase_rounds);
        }
    }

    #[test]
    fn other_shapes_are_rejected() {
        let shapes = shapes();
        for (i, a) in shapes.iter().enumerate() {
            for (j, b) in shapes.iter().enumerate() {
                if i != j {
                    for sigma in [2, 5] {
                        let coords = representation(b, &Transformation::scaled(sigma));
                        assert!(!recognize(a, &coords, 3).accepted, "{a} vs {b} at σ = {sigma}");
                    }
                }
            }
        }
    }

    #[test]
    fn perturbations_and_blobs_follow_the_oracle() {
        for sh in shapes() {
            let base = representation(&sh, &Transformation::scaled(5));
            for seed in 0..4 {
                for mode in [PerturbMode::Add, PerturbMode::Remove] {
                    let Ok(coords) = perturb(&base, mode, seed) else { continue };
                    let r = recognize(&sh, &coords, seed);
                    assert_eq!(r.accepted, is_representation(&sh, &coords), "{sh} {mode:?} {seed}");
                }
            }
            for seed in 0..4 {
                let coords = gen_random_connected(20 + 10 * seed as usize, seed);
                assert_eq!(recognize(&sh, &coords, seed).accepted, is_representation(&sh, &coords));
            }
        }
    }

    #[test]
    fn two_triangles_meeting_at_a_corner_are_rejected() {
        let a = representation(&Shape::triangle(), &Transformation::scaled(4));
        let b = representation(&Shape::triangle(), &Transformation::new(GridCoord::new(4, 0), 0, 5));
        let mut coords: Vec<GridCoord> = a.into_iter().chain(b).collect();
        coords.sort();
        coords.dedup();
        let r = recognize(&Shape::triangle(), &coords, 1);
        assert!(!r.accepted);
    }

    #[test]
    fn mixed_chirality_runs_agreement_first() {
        let sh = &shapes()[1];
        let coords = representation(sh, &Transformation::scaled(4));
        let o = random_orientations(coords.len(), 5, true, true);
        let s = Structure::new(&coords, &o, 2, 5).unwrap();
        let r = recognize_shape(s, sh, 1_000_000).unwrap();
        assert!(r.chirality_rounds > 0);
        // the rhombus is its own mirror image
        assert!(r.accepted);
    }

    #[test]
    fn invalid_inputs() {
        let coords = representation(&Shape::triangle(), &Transformation::scaled(2));
        let one_pin = Structure::uniform(&coords, 1, 0).unwrap();
        assert!(matches!(recognize_shape(one_pin, &Shape::triangle(), 1000), Err(Error::InvalidConfig(_))));
        let rhombus2 = shape(&[
            (0, 0, Pointing::Up),
            (0, 0, Pointing::Down),
            (1, 0, Pointing::Up),
            (1, 0, Pointing::Down),
            (0, 1, Pointing::Up),
            (0, 1, Pointing::Down),
            (1, 1, Pointing::Up),
            (1, 1, Pointing::Down),
        ]);
        assert!(matches!(ShapeRecognition::new(&rhombus2), Err(Error::ShapeTooLarge(8))));
        let big = shape(&[(0, 0, Pointing::Up), (0, 0, Pointing::Down), (1, 0, Pointing::Up), (0, 1, Pointing::Up)]);
        // four unit faces forming a triangle of side 2 are the triangle at scale 2
        assert!(matches!(ShapeRecognition::new(&big), Err(Error::ShapeNotMinimal)));
    }
}
