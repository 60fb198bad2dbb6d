//! Binary context-tree weighting with Krichevsky-Trofimov estimators.
//!
//! Each context node carries a KT estimator; an internal node's weighted
//! probability is ½ P_kt + ½ P_w(child0) P_w(child1). The ideal code length
//! of the input is -log2 of the root's weighted probability, so the returned
//! rate (code bits per input bit) upper-bounds the source entropy rate and
//! sits slightly above 1 for incompressible input.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::math::log2_add;

/// Context depth used throughout the evaluation harness.
pub const DEFAULT_DEPTH: usize = 6;

const MAX_DEPTH: usize = 20;

#[derive(Clone, Copy)]
struct Node {
    zeros: u64,
    ones: u64,
    log_pkt: f64,
    log_pw: f64,
}

impl Node {
    const EMPTY: Node = Node {
        zeros: 0,
        ones: 0,
        log_pkt: 0.0,
        log_pw: 0.0,
    };
}

/// Context tree over the last `depth` bits, zero-padded at the start.
pub struct CtwModel {
    depth: usize,
    /// Node (d, ctx) at index 2^d - 1 + ctx; ctx bit j-1 is the j-th most
    /// recent input bit.
    nodes: Vec<Node>,
    history: u32,
    bits_seen: u64,
}

impl CtwModel {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "context depth must be in 1..={MAX_DEPTH}, got {depth}"
            )));
        }
        Ok(CtwModel {
            depth,
            nodes: vec![Node::EMPTY; (1 << (depth + 1)) - 1],
            history: 0,
            bits_seen: 0,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    fn index(depth: usize, ctx: u32) -> usize {
        ((1usize << depth) - 1) + ctx as usize
    }

    /// Feed one bit through the model.
    pub fn update(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        // Path from root to leaf along the current context.
        let mut path = [0usize; MAX_DEPTH + 1];
        let mut ctx = 0u32;
        for (d, slot) in path.iter_mut().enumerate().take(self.depth + 1) {
            *slot = Self::index(d, ctx);
            if d < self.depth {
                ctx |= (self.history >> d & 1) << d;
            }
        }
        // KT update and weighting from leaf to root.
        for d in (0..=self.depth).rev() {
            let idx = path[d];
            let node = &mut self.nodes[idx];
            let (z, o) = (node.zeros as f64, node.ones as f64);
            let p_next = if bit == 0 {
                (z + 0.5) / (z + o + 1.0)
            } else {
                (o + 0.5) / (z + o + 1.0)
            };
            node.log_pkt += p_next.log2();
            if bit == 0 {
                node.zeros += 1;
            } else {
                node.ones += 1;
            }
            if d == self.depth {
                node.log_pw = node.log_pkt;
            } else {
                let child0 = Self::index(d + 1, ctx_prefix(self.history, d));
                let child1 = child0 + (1 << d);
                let children = self.nodes[child0].log_pw + self.nodes[child1].log_pw;
                let log_pkt = self.nodes[idx].log_pkt;
                self.nodes[idx].log_pw = -1.0 + log2_add(log_pkt, children);
            }
        }
        self.history = ((self.history << 1) | bit as u32) & ((1 << self.depth) - 1);
        self.bits_seen += 1;
    }

    /// Ideal code length in bits of everything fed so far.
    pub fn code_length(&self) -> f64 {
        -self.nodes[0].log_pw
    }

    pub fn bits_seen(&self) -> u64 {
        self.bits_seen
    }
}

// Context value of the depth-d+1 children pair under the current history:
// the low d bits of the context (most recent first), without the splitting
// bit, which selects child0 vs child1.
#[inline]
fn ctx_prefix(history: u32, d: usize) -> u32 {
    history & ((1 << d) - 1)
}

/// Ideal CTW code length divided by input length; may exceed 1 for
/// incompressible input.
pub fn compression_rate(bits: &Bits, depth: usize) -> Result<f64> {
    if bits.len() <= depth {
        return Err(Error::InputTooShort {
            depth,
            got: bits.len(),
        });
    }
    let mut model = CtwModel::new(depth)?;
    for &b in bits.iter() {
        model.update(b);
    }
    Ok(model.code_length() / bits.len() as f64)
}
