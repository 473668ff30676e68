//! Sobol' low-discrepancy point sets and randomized replicates.
//!
//! Points are generated in natural index order: the point with index `k`
//! (1-based, the all-zeros point at index 0 is skipped) is the XOR of the
//! direction vectors selected by the binary digits of `k`. In dimension 1
//! this is the van der Corput sequence in base 2, so the first four points
//! of a one-dimensional set are 0.5, 0.25, 0.75, 0.125.
//!
//! Replication for error estimation uses Cranley–Patterson rotations: each
//! replicate shifts every coordinate by a pseudo-random offset modulo 1.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DIRECTION_TABLE: &str = include_str!("../data/sobol_directions.txt");
const BITS: usize = 32;
const SCALE: f64 = 1.0 / (1u64 << BITS) as f64;

/// Default seed used when a caller does not choose one.
pub const DEFAULT_SEED: u64 = 42;

struct DirectionRow {
    degree: usize,
    poly_coeffs: u32,
    initial: Vec<u32>,
}

struct DirectionSet {
    /// Per dimension, the 32 direction integers, most significant bit first.
    vectors: Vec<[u32; BITS]>,
}

impl DirectionSet {
    fn dimensions(&self) -> usize {
        self.vectors.len()
    }
}

fn parse_table(text: &str) -> Result<Vec<DirectionRow>> {
    let mut rows = Vec::new();
    let mut expected_dim = 2;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next_int = |name: &'static str| -> Result<u64> {
            fields
                .next()
                .ok_or_else(|| Error::DirectionTable {
                    line: idx + 1,
                    message: format!("missing field {name}"),
                })?
                .parse()
                .map_err(|e| Error::DirectionTable {
                    line: idx + 1,
                    message: format!("bad {name}: {e}"),
                })
        };
        let d = next_int("dimension")? as usize;
        if d != expected_dim {
            return Err(Error::DirectionTable {
                line: idx + 1,
                message: format!("expected dimension {expected_dim}, found {d}"),
            });
        }
        let degree = next_int("degree")? as usize;
        let poly_coeffs = next_int("polynomial")? as u32;
        let mut initial = Vec::with_capacity(degree);
        for k in 1..=degree {
            let m = next_int("direction integer")?;
            if m % 2 == 0 || m >= (1 << k) {
                return Err(Error::DirectionTable {
                    line: idx + 1,
                    message: format!("m_{k} = {m} is not an odd integer below 2^{k}"),
                });
            }
            initial.push(m as u32);
        }
        rows.push(DirectionRow {
            degree,
            poly_coeffs,
            initial,
        });
        expected_dim += 1;
    }
    Ok(rows)
}

/// Expand one table row into the 32 direction integers via the standard
/// primitive-polynomial recurrence.
fn expand_row(row: &DirectionRow) -> [u32; BITS] {
    let s = row.degree;
    let mut v = [0u32; BITS + 1];
    for k in 1..=s.min(BITS) {
        v[k] = row.initial[k - 1] << (BITS - k);
    }
    for k in (s + 1)..=BITS {
        let mut vk = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (row.poly_coeffs >> (s - 1 - j)) & 1 == 1 {
                vk ^= v[k - j];
            }
        }
        v[k] = vk;
    }
    let mut out = [0u32; BITS];
    out.copy_from_slice(&v[1..=BITS]);
    out
}

fn direction_set() -> &'static DirectionSet {
    static SET: OnceLock<DirectionSet> = OnceLock::new();
    SET.get_or_init(|| {
        let rows = parse_table(DIRECTION_TABLE).expect("vendored direction table is well-formed");
        let mut vectors = Vec::with_capacity(rows.len() + 1);
        // Dimension 1: van der Corput, all initial integers equal to 1.
        let mut vdc = [0u32; BITS];
        for (k, v) in vdc.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        vectors.push(vdc);
        vectors.extend(rows.iter().map(expand_row));
        DirectionSet { vectors }
    })
}

/// Number of dimensions the vendored direction table supports.
pub fn max_dimension() -> usize {
    direction_set().dimensions()
}

/// An immutable description of a deterministic point set.
///
/// Identical `(dimension, count, replicate_shift)` always produce the
/// identical points; `seed` only governs how replicate shifts are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    dimension: usize,
    count: usize,
    replicate_shift: Option<Vec<f64>>,
    seed: u64,
}

impl SamplePlan {
    pub fn new(dimension: usize, count: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension", "must be positive"));
        }
        let available = max_dimension();
        if dimension > available {
            return Err(Error::DimensionUnsupported {
                requested: dimension,
                available,
            });
        }
        if count == 0 {
            return Err(Error::invalid("count", "must be positive"));
        }
        Ok(SamplePlan {
            dimension,
            count,
            replicate_shift: None,
            seed: DEFAULT_SEED,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: shift.len(),
            });
        }
        if shift.iter().any(|s| !(0.0..1.0).contains(s)) {
            return Err(Error::invalid("shift", "components must lie in [0, 1)"));
        }
        self.replicate_shift = Some(shift);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate_shift(&self) -> Option<&[f64]> {
        self.replicate_shift.as_deref()
    }

    /// Same sequence parameters with a different point count.
    pub fn with_count(&self, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("count", "must be positive"));
        }
        let mut plan = self.clone();
        plan.count = count;
        Ok(plan)
    }
}

/// A dense row-major matrix of points in `[0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dimension: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn point(&self, index: usize) -> &[f64] {
        &self.data[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dimension)
    }

    /// Copy of one coordinate across all points.
    pub fn column(&self, coordinate: usize) -> Vec<f64> {
        assert!(coordinate < self.dimension);
        self.data
            .iter()
            .skip(coordinate)
            .step_by(self.dimension)
            .copied()
            .collect()
    }

    /// New point set keeping coordinates `[start, start + width)`.
    pub fn columns(&self, start: usize, width: usize) -> PointSet {
        assert!(start + width <= self.dimension);
        let mut data = Vec::with_capacity(self.len() * width);
        for row in self.rows() {
            data.extend_from_slice(&row[start..start + width]);
        }
        PointSet {
            dimension: width,
            data,
        }
    }
}

/// Generate the plan's points: rows are consecutive Sobol' points starting
/// at index 1 (the all-zeros point is skipped), rotated by the plan's shift
/// when present.
pub fn sobol_points(plan: &SamplePlan) -> Result<PointSet> {
    let set = direction_set();
    if plan.dimension > set.dimensions() {
        return Err(Error::DimensionUnsupported {
            requested: plan.dimension,
            available: set.dimensions(),
        });
    }
    let d = plan.dimension;
    let n = plan.count;
    let mut data = vec![0.0f64; n * d];
    let vectors = &set.vectors[..d];
    for (i, row) in data.chunks_exact_mut(d).enumerate() {
        let index = (i + 1) as u64;
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = 0u32;
            let mut k = index;
            let mut bit = 0;
            while k != 0 {
                if k & 1 == 1 {
                    acc ^= vectors[j][bit];
                }
                k >>= 1;
                bit += 1;
            }
            *cell = acc as f64 * SCALE;
        }
    }
    if let Some(shift) = &plan.replicate_shift {
        for row in data.chunks_exact_mut(d) {
            for (x, s) in row.iter_mut().zip(shift) {
                *x = (*x + s).fract();
            }
        }
    }
    Ok(PointSet { dimension: d, data })
}

/// `K` plans sharing the sequence but carrying independent pseudo-random
/// shifts. The shift of replicate `k` depends only on `(seed, k)`.
pub fn replicate_plans(
    dimension: usize,
    count: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<SamplePlan>> {
    if k == 0 {
        return Err(Error::invalid("k", "at least one replicate is required"));
    }
    let base = SamplePlan::new(dimension, count)?.with_seed(seed);
    (0..k)
        .map(|replicate| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(replicate as u64);
            let shift: Vec<f64> = (0..dimension).map(|_| rng.gen::<f64>()).collect();
            base.clone().with_shift(shift)
        })
        .collect()
}
