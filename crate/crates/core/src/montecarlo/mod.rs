//! Seed-deterministic Monte Carlo runs.
//!
//! Sample `i` draws everything it needs from stream `(master_seed, i)`.
//! Samples are grouped into fixed chunks of [`CHUNK_SIZE`]; each chunk is
//! reduced on its own, and chunk statistics are merged strictly in chunk
//! order. Chunk boundaries do not depend on the worker count, so tables are
//! bit-identical for every `parallelism`.

mod config;
pub mod exec;
pub mod report;
mod stats;

use std::time::Instant;

use nalgebra::DVector;

pub use config::{
    z_score, Ensemble, ExperimentConfig, ExperimentKind, Metadata, ResultRow, ResultTable,
    StateMode, ASYMPTOTIC_ROW, DEFAULT_TIME_AVERAGE_N,
};
pub use exec::Backend;
pub use stats::RunningStats;

use crate::dynamics::{
    asymptotic_entropy_from_spectrum, spectral_decompose, time_average_entropy_spectral,
    trace_power,
};
use crate::ensembles::{
    random_product_state, sample_coe, sample_cue, BipartiteDims, Field, PureState, RandomStream,
    UnitaryMatrix,
};
use crate::entanglement::{linear_entropy_of_amplitudes, operator_entanglement_of_matrix};
use crate::{Error, Result};

pub const CHUNK_SIZE: u64 = 256;

/// Fallback share above which a warning is attached to the metadata.
const FALLBACK_WARN_FRACTION: f64 = 0.01;

/// Per-sample pipeline derived from a validated config.
struct Sampler {
    cfg: ExperimentConfig,
    dims: BipartiteDims,
    fixed_state: Option<PureState>,
}

impl Sampler {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let dims = cfg.dims()?;
        let fixed_state = match cfg.state_mode {
            StateMode::FixedProduct => Some(match cfg.fixed_state_seed {
                None => PureState::basis(dims, 0, 0)?,
                Some(seed) => {
                    let field = match cfg.ensemble {
                        Ensemble::Cue => Field::Complex,
                        Ensemble::Coe => Field::Real,
                    };
                    random_product_state(dims, field, &mut RandomStream::new(seed, 0).rng())
                }
            }),
            _ => None,
        };
        Ok(Self {
            cfg: *cfg,
            dims,
            fixed_state,
        })
    }

    fn width(&self) -> usize {
        if self.cfg.kind.is_curve() {
            self.cfg.n_max as usize
        } else {
            1
        }
    }

    /// Fills `out` with this sample's observables; returns whether the
    /// degeneracy fallback was used.
    fn observe(&self, index: u64, out: &mut [f64]) -> Result<bool> {
        let mut rng = RandomStream::new(self.cfg.master_seed, index).rng();
        let u: UnitaryMatrix = match self.cfg.ensemble {
            Ensemble::Cue => sample_cue(self.dims, &mut rng),
            Ensemble::Coe => sample_coe(self.dims, &mut rng),
        };
        let drawn;
        let psi = match self.cfg.state_mode {
            StateMode::FixedProduct => self.fixed_state.as_ref(),
            StateMode::RandomComplexProduct => {
                drawn = random_product_state(self.dims, Field::Complex, &mut rng);
                Some(&drawn)
            }
            StateMode::RandomRealProduct => {
                drawn = random_product_state(self.dims, Field::Real, &mut rng);
                Some(&drawn)
            }
            StateMode::None => None,
        };
        let spec = spectral_decompose(&u)?;
        let state = || psi.ok_or_else(|| Error::Config("missing initial state".into()));

        match self.cfg.kind {
            ExperimentKind::EpCurve => {
                let coeffs = spec.coefficients(state()?);
                let d = self.dims.d();
                let mut scratch = DVector::zeros(d);
                let mut evolved = DVector::zeros(d);
                for (n, slot) in (1..).zip(out.iter_mut()) {
                    spec.evolve_into(&coeffs, n, &mut scratch, &mut evolved);
                    *slot = linear_entropy_of_amplitudes(evolved.as_slice(), self.dims);
                }
            }
            ExperimentKind::OpentCurve => {
                for (n, slot) in (1..).zip(out.iter_mut()) {
                    *slot = operator_entanglement_of_matrix(&spec.power_matrix(n), self.dims);
                }
            }
            ExperimentKind::FormFactor => {
                for (n, slot) in (1..).zip(out.iter_mut()) {
                    *slot = trace_power(spec.phases(), n).norm_sqr();
                }
            }
            ExperimentKind::FourthMoment => {
                for (n, slot) in (1..).zip(out.iter_mut()) {
                    *slot = trace_power(spec.phases(), n).norm_sqr().powi(2);
                }
            }
            ExperimentKind::Asymptotic => {
                let psi = state()?;
                return match asymptotic_entropy_from_spectrum(&spec, psi) {
                    Ok(v) => {
                        out[0] = v;
                        Ok(false)
                    }
                    Err(Error::Degenerate { .. }) => {
                        out[0] = time_average_entropy_spectral(&spec, psi, self.cfg.time_average_n);
                        Ok(true)
                    }
                    Err(e) => Err(e),
                };
            }
        }
        Ok(false)
    }
}

struct ChunkResult {
    stats: Vec<RunningStats>,
    fallbacks: u64,
}

fn run_chunk(sampler: &Sampler, chunk: usize) -> Result<ChunkResult> {
    let start = chunk as u64 * CHUNK_SIZE;
    let end = (start + CHUNK_SIZE).min(sampler.cfg.samples);
    let width = sampler.width();
    let mut stats = vec![RunningStats::new(); width];
    let mut buf = vec![0.0; width];
    let mut fallbacks = 0;
    for index in start..end {
        if sampler.observe(index, &mut buf)? {
            fallbacks += 1;
        }
        for (s, &x) in stats.iter_mut().zip(&buf) {
            s.update(x);
        }
    }
    Ok(ChunkResult { stats, fallbacks })
}

/// Runs `cfg` with up to `parallelism` worker threads.
pub fn run_experiment(cfg: &ExperimentConfig, parallelism: usize) -> Result<ResultTable> {
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be ≥ 1".into()));
    }
    run_with_backend(cfg, Backend::for_parallelism(parallelism))
}

/// [`run_experiment`] with an explicit backend.
pub fn run_with_backend(cfg: &ExperimentConfig, backend: Backend) -> Result<ResultTable> {
    cfg.validate()?;
    let started = Instant::now();
    let sampler = Sampler::new(cfg)?;
    let n_chunks = cfg.samples.div_ceil(CHUNK_SIZE) as usize;
    let chunks = exec::map_chunks(n_chunks, backend, |c| run_chunk(&sampler, c))?;

    let mut totals = vec![RunningStats::new(); sampler.width()];
    let mut fallbacks = 0;
    for chunk in chunks {
        let chunk = chunk?;
        fallbacks += chunk.fallbacks;
        for (t, s) in totals.iter_mut().zip(&chunk.stats) {
            *t = t.merge(s);
        }
    }

    let rows = totals
        .iter()
        .enumerate()
        .map(|(i, s)| ResultRow {
            n: if cfg.kind.is_curve() {
                i as i64 + 1
            } else {
                ASYMPTOTIC_ROW
            },
            mean: s.mean,
            stderr: s.stderr(),
            count: s.count,
        })
        .collect();

    let mut warnings = Vec::new();
    if fallbacks as f64 > FALLBACK_WARN_FRACTION * cfg.samples as f64 {
        warnings.push(format!(
            "{fallbacks} of {} samples used the direct time average (degenerate spectrum)",
            cfg.samples
        ));
    }
    Ok(ResultTable {
        metadata: Metadata {
            config: *cfg,
            seed: cfg.master_seed,
            wall_seconds: started.elapsed().as_secs_f64(),
            library_version: crate::VERSION.to_string(),
            degeneracy_fallbacks: fallbacks,
            warnings,
        },
        rows,
    })
}
