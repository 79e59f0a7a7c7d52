//! Everything computed once per (q, a): field, orbits, exact sums, angles.

use crate::chars::{gauss_angle, kappa_split, kloosterman_power_sum, CharContext, KappaSplit};
use crate::cyclo::{CycInt, EmbedTable};
use crate::error::{Error, Result};
use crate::ffield::{ExtField, FieldParams};
use crate::numeric::RealBall;
use crate::orbits::{ambient_degree, OrbitSet};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Integer;
use std::sync::Arc;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;
/// Precision ceiling for automatic escalation.
pub const MAX_PRECISION: u32 = 4096;
/// Every angle is resolved to this absolute accuracy before statistics.
pub const ANGLE_RESOLUTION: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelConfig {
    pub q: u64,
    pub a: u32,
    /// psi_0(x) = zeta_p^{psi_mult lift(x)}
    pub psi_mult: u64,
    /// relax p >= 7 to p >= 5
    pub allow_small_char: bool,
}

impl LevelConfig {
    pub fn new(q: u64, a: u32) -> Self {
        LevelConfig {
            q,
            a,
            psi_mult: 1,
            allow_small_char: false,
        }
    }
}

/// Exact data of one level.
#[derive(Debug)]
pub struct Level {
    pub config: LevelConfig,
    pub chars: CharContext,
    pub orbits: OrbitSet,
    /// Kl_v over F_{q^{|v|}} with shift the place representative
    pub place_kl: Vec<CycInt>,
    /// gamma(o), fast path
    pub gauss: Vec<CycInt>,
    /// Kl(o), fast path
    pub kl: Vec<CycInt>,
}

impl Level {
    pub fn new(config: LevelConfig) -> Result<Self> {
        if config.a == 0 {
            return Err(Error::OutOfRange("level a must be positive".into()));
        }
        let params = if config.allow_small_char {
            FieldParams::relaxed(config.q)?
        } else {
            FieldParams::new(config.q)?
        };
        let field = Arc::new(ExtField::new(params, ambient_degree(config.q, config.a))?);
        let chars = CharContext::with_psi(field.clone(), config.psi_mult)?;
        let orbits = OrbitSet::new(&field, config.a)?;
        let place_kl = orbits
            .places
            .par_iter()
            .map(|v| chars.kloosterman_sum(v.size, v.rep))
            .collect::<Result<Vec<_>>>()?;
        let base = chars.base_gauss()?;
        let gauss = orbits
            .orbits
            .par_iter()
            .map(|o| chars.gauss_fast(&base, o.size, o.j, o.rep))
            .collect::<Result<Vec<_>>>()?;
        let q = Integer::from(config.q);
        let kl = orbits
            .orbits
            .par_iter()
            .map(|o| {
                let d = orbits.places[o.place].size;
                kloosterman_power_sum(&place_kl[o.place], &q.clone().pow(d), o.size / d)
            })
            .collect();
        Ok(Level {
            config,
            chars,
            orbits,
            place_kl,
            gauss,
            kl,
        })
    }

    pub fn q(&self) -> u64 {
        self.config.q
    }
    pub fn a(&self) -> u32 {
        self.config.a
    }
    pub fn params(&self) -> FieldParams {
        self.chars.params()
    }
    pub fn field(&self) -> &Arc<ExtField> {
        self.chars.field()
    }

    /// Angles and kappa pairs at a fixed precision.
    pub fn numerics(&self, prec: u32) -> Result<LevelNumerics> {
        let table = EmbedTable::new(self.chars.ring(), prec);
        let q = self.q();
        let orbit = self
            .orbits
            .orbits
            .par_iter()
            .enumerate()
            .map(|(i, o)| {
                let eps = gauss_angle(&self.gauss[i], &table)?;
                let split = kappa_split(&self.kl[i], q, o.size, &table)?;
                Ok(OrbitNumerics { eps, split })
            })
            .collect::<Result<Vec<_>>>()?;
        let place = self
            .orbits
            .places
            .par_iter()
            .enumerate()
            .map(|(i, v)| kappa_split(&self.place_kl[i], q, v.size, &table))
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelNumerics { prec, orbit, place })
    }

    /// Numerics with precision doubled until every angle radius is below
    /// `resolution`.
    pub fn numerics_resolved(&self, start: u32, resolution: f64) -> Result<LevelNumerics> {
        let mut prec = start.max(64);
        loop {
            match self.numerics(prec) {
                Ok(n) if n.max_angle_radius() < resolution => return Ok(n),
                Ok(_) | Err(Error::Precision { .. }) if prec < MAX_PRECISION => prec *= 2,
                Ok(n) => {
                    return Err(Error::Precision {
                        what: format!("angles to {resolution:e} (radius {:e})", n.max_angle_radius()),
                        bits: prec,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitNumerics {
    /// Gauss angle in [0, 2 pi)
    pub eps: RealBall,
    pub split: KappaSplit,
}

#[derive(Clone, Debug)]
pub struct LevelNumerics {
    pub prec: u32,
    pub orbit: Vec<OrbitNumerics>,
    pub place: Vec<KappaSplit>,
}

impl LevelNumerics {
    pub fn max_angle_radius(&self) -> f64 {
        let a = self
            .orbit
            .iter()
            .flat_map(|o| [o.eps.rad_f64(), o.split.theta.rad_f64()])
            .fold(0.0, f64::max);
        self.place.iter().map(|s| s.theta.rad_f64()).fold(a, f64::max)
    }
}
