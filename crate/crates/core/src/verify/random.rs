use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Rational;
use crate::tree::WeightedTree;

/// Distribution of edge weights for random trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightModel {
    Unit,
    /// Uniform integer in `lo..=hi`.
    Int {
        lo: i64,
        hi: i64,
    },
    /// `k / den` with `den` uniform in `1..=max_den` and the value in `[lo, hi]`.
    Rat {
        lo: i64,
        hi: i64,
        max_den: i64,
    },
}

impl WeightModel {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = match *self {
            WeightModel::Unit => return Ok(()),
            WeightModel::Int { lo, hi } => (lo, hi),
            WeightModel::Rat { lo, hi, max_den } => {
                if max_den < 1 {
                    return Err(Error::BadConfig(format!(
                        "max_den must be >= 1, got {max_den}"
                    )));
                }
                (lo, hi)
            }
        };
        if lo <= 0 {
            return Err(Error::BadConfig(format!(
                "weight lower bound must be > 0, got {lo}"
            )));
        }
        if hi < lo {
            return Err(Error::BadConfig(format!("empty weight range {lo}..{hi}")));
        }
        Ok(())
    }

    /// Every weight the model can produce is an integer.
    pub fn is_integral(&self) -> bool {
        !matches!(self, WeightModel::Rat { .. })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Rational {
        match *self {
            WeightModel::Unit => Rational::from_integer(1.into()),
            WeightModel::Int { lo, hi } => Rational::from_integer(rng.gen_range(lo..=hi).into()),
            WeightModel::Rat { lo, hi, max_den } => {
                let den = rng.gen_range(1..=max_den);
                let num = rng.gen_range(lo * den..=hi * den);
                Rational::new(BigInt::from(num), BigInt::from(den))
            }
        }
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightModel::Unit => write!(f, "unit"),
            WeightModel::Int { lo, hi } => write!(f, "int:{lo}:{hi}"),
            WeightModel::Rat { lo, hi, max_den } => write!(f, "rat:{lo}:{hi}:{max_den}"),
        }
    }
}

impl FromStr for WeightModel {
    type Err = Error;

    /// `unit`, `int:LO:HI` or `rat:LO:HI:MAXDEN`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| -> Result<i64> {
            p.trim()
                .parse()
                .map_err(|_| Error::BadConfig(format!("bad number {p:?} in weight model {s:?}")))
        };
        let model = match parts.as_slice() {
            ["unit"] => WeightModel::Unit,
            ["int", lo, hi] => WeightModel::Int {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            ["rat", lo, hi, den] => WeightModel::Rat {
                lo: num(lo)?,
                hi: num(hi)?,
                max_den: num(den)?,
            },
            _ => {
                return Err(Error::BadConfig(format!(
                    "weight model {s:?}; expected unit, int:LO:HI or rat:LO:HI:MAXDEN"
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }
}

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform labelled tree on `n` vertices from a random Prüfer sequence.
pub fn random_tree(n: usize, seed: u64, weights: WeightModel) -> Result<WeightedTree> {
    if n < 2 {
        return Err(Error::BadConfig(format!("n must be >= 2, got {n}")));
    }
    weights.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let edges = prufer_decode(n, &code)
        .into_iter()
        .map(|(u, v)| (u + 1, v + 1, weights.sample(&mut rng)))
        .collect();
    WeightedTree::new(n, edges)
}

/// Zero-based edges of the tree with Prüfer code `code`.
fn prufer_decode(n: usize, code: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &x in code {
        degree[x] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in code {
        let leaf = leaves.pop_first().expect("a leaf always exists");
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.insert(x);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    edges.push((last[0], last[1]));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices() {
        let t = random_tree(2, 7, WeightModel::Unit).unwrap();
        assert_eq!(t.edges().len(), 1);
    }

    #[test]
    fn same_seed_same_tree() {
        let m = WeightModel::Rat {
            lo: 1,
            hi: 5,
            max_den: 4,
        };
        assert_eq!(
            random_tree(5, 42, m).unwrap(),
            random_tree(5, 42, m).unwrap()
        );
        assert_ne!(random_tree(9, 1, m).unwrap(), random_tree(9, 2, m).unwrap());
    }

    #[test]
    fn nine_vertices_connected() {
        for seed in 0..20 {
            let t = random_tree(9, seed, WeightModel::Int { lo: 1, hi: 10 }).unwrap();
            assert_eq!(t.edges().len(), 8);
            assert!(t
                .edges()
                .iter()
                .all(|e| *e.weight.value() >= Rational::from_integer(1.into())));
        }
    }

    #[test]
    fn prufer_known_code() {
        // code [3, 3, 3] is the star centred at 3 (zero-based)
        let mut e = prufer_decode(5, &[3, 3, 3]);
        e.sort();
        assert_eq!(e, vec![(0, 3), (1, 3), (2, 3), (3, 4)]);
    }

    #[test]
    fn weight_model_parsing() {
        assert_eq!("unit".parse::<WeightModel>().unwrap(), WeightModel::Unit);
        assert_eq!(
            "int:1:10".parse::<WeightModel>().unwrap(),
            WeightModel::Int { lo: 1, hi: 10 }
        );
        assert_eq!(
            "rat:1:3:8".parse::<WeightModel>().unwrap(),
            WeightModel::Rat {
                lo: 1,
                hi: 3,
                max_den: 8
            }
        );
        for bad in ["int:0:3", "int:5:2", "rat:1:2:0", "float", "int:a:b", ""] {
            assert!(
                matches!(bad.parse::<WeightModel>(), Err(Error::BadConfig(_))),
                "{bad}"
            );
        }
        assert_eq!(
            WeightModel::Rat {
                lo: 1,
                hi: 3,
                max_den: 8
            }
            .to_string(),
            "rat:1:3:8"
        );
        assert!(random_tree(1, 0, WeightModel::Unit).is_err());
    }
}
