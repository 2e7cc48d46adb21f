//! Independent reference computations for the integration tests.

#![allow(dead_code)]

use fpa_core::Rational;

/// History statistics recomputed from scratch with rationals, straight from
/// the definitions. Indexed `[bidder][bid or level]`.
pub struct OracleStats {
    pub alpha: Vec<Vec<Rational>>,
    pub p: Vec<Vec<Rational>>,
    pub q: Vec<Vec<Rational>>,
    pub f: Vec<Vec<Rational>>,
}

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// `u(b, others)` for a bidder with value `v`.
pub fn utility(v: u32, b: u32, others: &[u32]) -> Rational {
    let m = others.iter().copied().max().unwrap_or(0);
    let c = others.iter().filter(|&&x| x == m).count() as i128;
    let gain = v as i128 - b as i128;
    if others.is_empty() || b > m {
        r(gain, 1)
    } else if b == m {
        r(gain, c + 1)
    } else {
        r(0, 1)
    }
}

pub fn oracle(values: &[u32], trace: &[Vec<u32>]) -> OracleStats {
    let n = values.len();
    let cap = *values.iter().max().unwrap() as usize;
    let t = trace.len() as i128;
    let zero = r(0, 1);
    let mut out = OracleStats {
        alpha: values.iter().map(|&v| vec![zero; v as usize]).collect(),
        p: vec![vec![zero; cap]; n],
        q: vec![vec![zero; cap]; n],
        f: values.iter().map(|&v| vec![zero; v as usize]).collect(),
    };
    if t == 0 {
        return out;
    }
    for bids in trace {
        for i in 0..n {
            let others: Vec<u32> = bids.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &b)| b).collect();
            let m = others.iter().copied().max().unwrap();
            let c = others.iter().filter(|&&x| x == m).count() as i128;
            for b in 0..values[i] {
                out.alpha[i][b as usize] += utility(values[i], b, &others) / t;
            }
            out.p[i][m as usize] += r(1, t);
            out.q[i][m as usize] += r(1, (c + 1) * t);
            out.f[i][bids[i] as usize] += r(1, t);
        }
    }
    out
}
