//! Multi-modular ranks with a per-prime report.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::modp::{rank_mod_p_with, EliminationConfig};
use crate::linalg::sparse::SparseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeRank {
    pub prime: u32,
    pub rank: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub ncols: usize,
    pub per_prime: Vec<PrimeRank>,
    /// Maximum of the per-prime ranks; a rank mod p never exceeds the rank over Q.
    pub rank: usize,
    /// All primes gave the same rank.
    pub agree: bool,
}

impl RankReport {
    /// `ncols - rank`: dimension of the cokernel of the row map.
    pub fn corank(&self) -> usize {
        self.ncols - self.rank
    }
}

/// Rank over Q as the maximum of ranks modulo the given primes.
pub fn rank_q(m: &SparseMatrix, primes: &[u32]) -> Result<RankReport> {
    rank_q_with(m, primes, &EliminationConfig::default())
}

pub fn rank_q_with(m: &SparseMatrix, primes: &[u32], cfg: &EliminationConfig) -> Result<RankReport> {
    if primes.is_empty() {
        return Err(Error::EmptyPrimeList);
    }
    let per_prime = primes
        .par_iter()
        .map(|&p| {
            let t = Instant::now();
            let rank = rank_mod_p_with(m, p, cfg)?;
            Ok(PrimeRank { prime: p, rank, seconds: t.elapsed().as_secs_f64() })
        })
        .collect::<Result<Vec<_>>>()?;
    let rank = per_prime.iter().map(|r| r.rank).max().unwrap_or(0);
    let agree = per_prime.iter().all(|r| r.rank == rank);
    Ok(RankReport { ncols: m.ncols(), per_prime, rank, agree })
}
