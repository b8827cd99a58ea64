//! Flooding belief-propagation decoder.

use super::code::{DecoderKind, LdpcCode, ParityCheck};
use crate::Scalar;

/// Magnitude limit on channel and check messages.
pub const LLR_CLAMP: f64 = 30.0;
const MIN_SUM_SCALE: f64 = 0.75;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Hard-decided codeword after the last iteration.
    pub codeword: Vec<u8>,
    pub converged: bool,
    pub iterations: u32,
}

/// Edge-indexed view of `H`. Edges are numbered check-major.
#[derive(Debug)]
struct Edges {
    check_start: Vec<usize>,
    edge_var: Vec<u32>,
    var_start: Vec<usize>,
    var_edge: Vec<u32>,
}

impl Edges {
    fn new(h: &ParityCheck) -> Edges {
        let mut check_start = Vec::with_capacity(h.m() + 1);
        let mut edge_var = Vec::with_capacity(h.edges());
        check_start.push(0);
        for row in h.checks() {
            edge_var.extend_from_slice(row);
            check_start.push(edge_var.len());
        }
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); h.n()];
        for (e, &v) in edge_var.iter().enumerate() {
            buckets[v as usize].push(e as u32);
        }
        let mut var_start = Vec::with_capacity(h.n() + 1);
        let mut var_edge = Vec::with_capacity(edge_var.len());
        var_start.push(0);
        for b in buckets {
            var_edge.extend(b);
            var_start.push(var_edge.len());
        }
        Edges {
            check_start,
            edge_var,
            var_start,
            var_edge,
        }
    }
}

/// Belief-propagation decoder bound to one code. Positive LLR means bit 0.
#[derive(Debug)]
pub struct Decoder {
    edges: Edges,
    kind: DecoderKind,
    max_iterations: u32,
}

impl Decoder {
    pub fn new(code: &LdpcCode) -> Decoder {
        Decoder {
            edges: Edges::new(code.matrix()),
            kind: code.config().decoder,
            max_iterations: code.config().max_iterations,
        }
    }

    pub fn with_kind(mut self, kind: DecoderKind) -> Decoder {
        self.kind = kind;
        self
    }

    pub fn with_max_iterations(mut self, iterations: u32) -> Decoder {
        self.max_iterations = iterations;
        self
    }

    fn syndrome_ok(&self, hard: &[u8]) -> bool {
        let e = &self.edges;
        e.check_start.windows(2).all(|w| {
            e.edge_var[w[0]..w[1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ hard[v as usize])
                == 0
        })
    }

    /// Decodes one block of `n` LLRs.
    pub fn decode<T: Scalar>(&self, llr: &[T]) -> DecodeOutcome {
        let e = &self.edges;
        let n = e.var_start.len() - 1;
        assert_eq!(llr.len(), n, "one LLR per code bit");
        let clamp = T::of(LLR_CLAMP);
        let channel: Vec<T> = llr
            .iter()
            .map(|&l| {
                if l.is_nan() {
                    T::zero()
                } else {
                    l.max(-clamp).min(clamp)
                }
            })
            .collect();
        let mut hard: Vec<u8> = channel.iter().map(|&l| (l < T::zero()) as u8).collect();
        if self.syndrome_ok(&hard) {
            return DecodeOutcome {
                codeword: hard,
                converged: true,
                iterations: 0,
            };
        }

        let sum_product = self.kind == DecoderKind::SumProduct;
        let half = T::of(0.5);
        let two = T::of(2.0);
        let scale = T::of(MIN_SUM_SCALE);
        // variable-to-check messages; for sum-product stored as tanh(m / 2)
        let mut v2c: Vec<T> = e
            .edge_var
            .iter()
            .map(|&v| {
                let m = channel[v as usize];
                if sum_product {
                    (m * half).tanh()
                } else {
                    m
                }
            })
            .collect();
        let mut c2v = vec![T::zero(); v2c.len()];

        for it in 1..=self.max_iterations {
            for w in e.check_start.windows(2) {
                let (s, t) = (w[0], w[1]);
                if sum_product {
                    // forward products into c2v, then sweep backwards
                    let mut acc = T::one();
                    for i in s..t {
                        c2v[i] = acc;
                        acc = acc * v2c[i];
                    }
                    let mut back = T::one();
                    for i in (s..t).rev() {
                        let p = c2v[i] * back;
                        back = back * v2c[i];
                        c2v[i] = (two * p.atanh()).max(-clamp).min(clamp);
                    }
                } else {
                    let (mut min1, mut min2) = (T::infinity(), T::infinity());
                    let mut arg = s;
                    let mut negative = false;
                    for (i, &m) in v2c[s..t].iter().enumerate() {
                        negative ^= m < T::zero();
                        let a = m.abs();
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            arg = s + i;
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    for i in s..t {
                        let mag = if i == arg { min2 } else { min1 };
                        let neg = negative ^ (v2c[i] < T::zero());
                        let v = (scale * mag).min(clamp);
                        c2v[i] = if neg { -v } else { v };
                    }
                }
            }
            for v in 0..n {
                let edges = &e.var_edge[e.var_start[v]..e.var_start[v + 1]];
                let total = edges
                    .iter()
                    .fold(channel[v], |acc, &ed| acc + c2v[ed as usize]);
                hard[v] = (total < T::zero()) as u8;
                for &ed in edges {
                    let m = total - c2v[ed as usize];
                    v2c[ed as usize] = if sum_product { (m * half).tanh() } else { m };
                }
            }
            if self.syndrome_ok(&hard) {
                return DecodeOutcome {
                    codeword: hard,
                    converged: true,
                    iterations: it,
                };
            }
        }
        DecodeOutcome {
            codeword: hard,
            converged: false,
            iterations: self.max_iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::code::LdpcConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn small_code() -> LdpcCode {
        let cfg = LdpcConfig {
            k: 100,
            n: 300,
            ..LdpcConfig::rate_1_3()
        };
        LdpcCode::from_matrix(cfg, ParityCheck::peg(300, 200, 3, 5)).unwrap()
    }

    fn bpsk_llr(c: &[u8], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        c.iter()
            .map(|&b| {
                let x = if b == 0 { 1.0 } else { -1.0 };
                let z: f64 = rng.sample(StandardNormal);
                2.0 * (x + sigma * z) / (sigma * sigma)
            })
            .collect()
    }

    #[test]
    fn noiseless_converges_immediately() {
        let code = small_code();
        let dec = Decoder::new(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info: Vec<u8> = (0..100).map(|_| rng.gen_range(0..2)).collect();
        let c = code.encode_block(&info);
        let llr: Vec<f32> = c.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
        let out = dec.decode(&llr);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(code.extract_info(&out.codeword), info);
    }

    #[test]
    fn corrects_flipped_bits() {
        let code = small_code();
        let c = code.encode_block(&[1; 100]);
        let mut llr: Vec<f64> = c.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        for i in [3, 77, 150, 299] {
            llr[i] = -llr[i] * 0.5;
        }
        for kind in [DecoderKind::SumProduct, DecoderKind::MinSum] {
            let out = Decoder::new(&code).with_kind(kind).decode(&llr);
            assert!(out.converged, "{kind:?}");
            assert!(out.iterations >= 1);
            assert_eq!(out.codeword, c);
        }
    }

    #[test]
    fn moderate_noise_decodes_in_both_precisions() {
        let code = small_code();
        let dec = Decoder::new(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ok = 0;
        for _ in 0..40 {
            let info: Vec<u8> = (0..100).map(|_| rng.gen_range(0..2)).collect();
            let c = code.encode_block(&info);
            let llr = bpsk_llr(&c, 0.7, &mut rng);
            let a = dec.decode(&llr);
            let llr32: Vec<f32> = llr.iter().map(|&l| l as f32).collect();
            let b = dec.decode(&llr32);
            ok += (a.converged && a.codeword == c) as u32;
            assert_eq!(a.converged, b.converged);
        }
        assert!(ok >= 38, "{ok}");
    }

    #[test]
    fn hopeless_noise_reports_failure() {
        let code = small_code();
        let dec = Decoder::new(&code).with_max_iterations(20);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = code.encode_block(&[0; 100]);
        let llr = bpsk_llr(&c, 3.0, &mut rng);
        let out = dec.decode(&llr);
        assert!(!out.converged);
        assert_eq!(out.iterations, 20);
    }

    #[test]
    fn nan_and_huge_inputs_are_tamed() {
        let code = small_code();
        let c = code.encode_block(&[0; 100]);
        let mut llr: Vec<f64> = c.iter().map(|_| 1e9).collect();
        llr[5] = f64::NAN;
        let out = Decoder::new(&code).decode(&llr);
        assert!(out.converged);
    }
}
