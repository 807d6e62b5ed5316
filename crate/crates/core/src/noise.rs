//! Reproducible randomness.
//!
//! Every stream is keyed on `(master_seed, trajectory_index, component)`.
//! The master seed and component select a ChaCha key, the trajectory index
//! selects the ChaCha stream, so ensembles do not depend on execution order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{param, Result};
use crate::model::{JumpParams, MarkDist};

/// Source of randomness within one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    J,
    A,
    E,
    P,
    Jumps,
    /// Random initial conditions.
    Init,
    /// Event selection in the individual-based chain.
    Events,
}

impl Component {
    pub const ALL: [Component; 7] = [
        Component::J,
        Component::A,
        Component::E,
        Component::P,
        Component::Jumps,
        Component::Init,
        Component::Events,
    ];

    fn tag(self) -> u64 {
        match self {
            Component::J => 1,
            Component::A => 2,
            Component::E => 3,
            Component::P => 4,
            Component::Jumps => 5,
            Component::Init => 6,
            Component::Events => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Component::J => "J",
            Component::A => "A",
            Component::E => "E",
            Component::P => "P",
            Component::Jumps => "jumps",
            Component::Init => "init",
            Component::Events => "events",
        }
    }
}

/// Identifies the streams of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trajectory_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trajectory_index: u64) -> Self {
        Self {
            master_seed,
            trajectory_index,
        }
    }

    pub fn stream(&self, component: Component) -> Stream {
        Stream::new(*self, component)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic random stream. Not shared between threads.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: SeedSpec, component: Component) -> Self {
        let mut state = seed.master_seed ^ component.tag().wrapping_mul(0xD6E8_FEB8_6659_FD93);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(seed.trajectory_index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Exponential variate with the given positive rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform_open0().ln() / rate
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// A draw from `Normal(0, dt)`.
pub fn gaussian_increment(stream: &mut Stream, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(param(format!("increment length {dt} must be positive")));
    }
    Ok(dt.sqrt() * stream.standard_normal())
}

/// A jump at absolute time `time` with mark `mark`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub mark: f64,
}

/// First jump inside a cell: offset from the cell start and its mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellJump {
    pub offset: f64,
    pub mark: f64,
}

/// The first arrival of a rate-`lambda` Poisson process within a cell of
/// length `dt`, if any, with a mark drawn from `nu`.
///
/// Both the arrival and the mark are always drawn so the stream advances by a
/// fixed amount per cell.
pub fn first_jump_in_cell(stream: &mut Stream, lambda: f64, dt: f64, nu: &MarkDist) -> Option<CellJump> {
    let u = stream.uniform_open0();
    let v = stream.uniform();
    if lambda <= 0.0 {
        return None;
    }
    let tau = -u.ln() / lambda;
    if tau <= dt {
        Some(CellJump {
            offset: tau,
            mark: nu.sample(v),
        })
    } else {
        None
    }
}

/// Split every increment over `dt` into two increments over `dt / 2` by
/// Brownian-bridge sampling. Children sum to their parent.
pub fn refine_increments(coarse: &[f64], dt: f64, stream: &mut Stream) -> Vec<f64> {
    let sd = (0.25 * dt).sqrt();
    let mut fine = Vec::with_capacity(2 * coarse.len());
    for &w in coarse {
        let first = 0.5 * w + sd * stream.standard_normal();
        fine.push(first);
        fine.push(w - first);
    }
    fine
}

/// Sum consecutive pairs.
pub fn coarsen_increments(fine: &[f64]) -> Vec<f64> {
    fine.chunks(2).map(|c| c.iter().sum()).collect()
}

/// Every arrival of a rate-`lambda` marked Poisson process on `[0, horizon]`.
pub fn poisson_events(stream: &mut Stream, lambda: f64, horizon: f64, nu: &MarkDist) -> Vec<JumpEvent> {
    let mut events = Vec::new();
    if lambda <= 0.0 {
        return events;
    }
    let mut t = 0.0;
    loop {
        t += stream.exponential(lambda);
        if t > horizon {
            return events;
        }
        let mark = nu.sample(stream.uniform());
        events.push(JumpEvent { time: t, mark });
    }
}

/// Random inputs of one time cell. Increments are ordered `(J, A, E, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellDraws {
    pub dw: [f64; 4],
    pub jump: Option<CellJump>,
}

/// Supplies the random inputs cell by cell.
pub trait NoiseSource {
    fn cell(&mut self, index: usize, dt: f64) -> CellDraws;
}

/// Independent per-component streams of one trajectory.
#[derive(Debug, Clone)]
pub struct StreamNoise {
    j: Stream,
    a: Stream,
    e: Stream,
    p: Stream,
    jumps: Stream,
    lambda: f64,
    marks: MarkDist,
}

impl StreamNoise {
    pub fn new(seed: SeedSpec, jumps: &JumpParams) -> Self {
        Self {
            j: seed.stream(Component::J),
            a: seed.stream(Component::A),
            e: seed.stream(Component::E),
            p: seed.stream(Component::P),
            jumps: seed.stream(Component::Jumps),
            lambda: jumps.lambda,
            marks: jumps.marks.clone(),
        }
    }
}

impl NoiseSource for StreamNoise {
    fn cell(&mut self, _index: usize, dt: f64) -> CellDraws {
        let sd = dt.sqrt();
        CellDraws {
            dw: [
                sd * self.j.standard_normal(),
                sd * self.a.standard_normal(),
                sd * self.e.standard_normal(),
                sd * self.p.standard_normal(),
            ],
            jump: first_jump_in_cell(&mut self.jumps, self.lambda, dt, &self.marks),
        }
    }
}

/// Precomputed increments and jumps, one entry per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixedNoise {
    pub dw: [Vec<f64>; 4],
    pub jumps: Vec<Option<CellJump>>,
}

impl NoiseSource for FixedNoise {
    fn cell(&mut self, index: usize, _dt: f64) -> CellDraws {
        CellDraws {
            dw: [self.dw[0][index], self.dw[1][index], self.dw[2][index], self.dw[3][index]],
            jump: self.jumps.get(index).copied().flatten(),
        }
    }
}

/// Zero increments and no jumps.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn cell(&mut self, _index: usize, _dt: f64) -> CellDraws {
        CellDraws::default()
    }
}
