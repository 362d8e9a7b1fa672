//! On-disk formats: maze JSON, network checkpoints, search-tree and k-d tree dumps.
//!
//! A checkpoint is little-endian throughout:
//!
//! ```text
//! magic      8 bytes  "VMCTSNET"
//! version    u32      1
//! nets       u32      2 (value, then policy)
//! per net:   u32 layer count + 1, then that many u32 widths,
//!            then every parameter as f64, layer by layer,
//!            each layer a row-major weight matrix (out x in) then its biases
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vmcts_core::env::{BoxBounds, MazeSpec};
use vmcts_core::learn::{GaussianPolicy, Mlp, Nets};
use vmcts_core::planner::{EpisodeResult, SearchTree};
use vmcts_core::spatial::{KdHandle, KdTree};

use crate::error::{io_err, HarnessError, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"VMCTSNET";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_maze(path: &Path) -> Result<MazeSpec> {
    let m: MazeSpec = read_json(path)?;
    m.validate()?;
    Ok(m)
}

pub fn encode_checkpoint(nets: &Nets) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&2u32.to_le_bytes());
    for net in [&nets.value, nets.policy.net()] {
        out.extend_from_slice(&(net.widths().len() as u32).to_le_bytes());
        for &w in net.widths() {
            out.extend_from_slice(&(w as u32).to_le_bytes());
        }
        for p in net.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Nets> {
    let mut rd = bytes;
    let mut magic = [0u8; 8];
    read_exact(&mut rd, &mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(HarnessError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(&mut rd)?;
    if version != CHECKPOINT_VERSION {
        return Err(HarnessError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    if read_u32(&mut rd)? != 2 {
        return Err(HarnessError::Checkpoint("expected two networks".into()));
    }
    let value = read_mlp(&mut rd)?;
    let policy = read_mlp(&mut rd)?;
    if !rd.is_empty() {
        return Err(HarnessError::Checkpoint(format!(
            "{} trailing bytes",
            rd.len()
        )));
    }
    if value.output_dim() != 1 {
        return Err(HarnessError::Checkpoint(
            "value network must have one output".into(),
        ));
    }
    Ok(Nets {
        value,
        policy: GaussianPolicy::new(policy)?,
    })
}

pub fn save_checkpoint(path: &Path, nets: &Nets) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&encode_checkpoint(nets)).map_err(io_err(path))
}

pub fn load_checkpoint(path: &Path) -> Result<Nets> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    decode_checkpoint(&bytes)
}

fn read_exact(rd: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    rd.read_exact(buf)
        .map_err(|_| HarnessError::Checkpoint("truncated".into()))
}

fn read_u32(rd: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(rd, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_mlp(rd: &mut &[u8]) -> Result<Mlp> {
    let n = read_u32(rd)? as usize;
    if !(2..=64).contains(&n) {
        return Err(HarnessError::Checkpoint(format!(
            "implausible layer count {n}"
        )));
    }
    let widths = (0..n)
        .map(|_| read_u32(rd).map(|w| w as usize))
        .collect::<Result<Vec<_>>>()?;
    if widths.contains(&0) {
        return Err(HarnessError::Checkpoint("zero layer width".into()));
    }
    let count = widths.windows(2).fold(0usize, |acc, w| {
        acc.saturating_add(w[0].saturating_mul(w[1]).saturating_add(w[1]))
    });
    if rd.len() / 8 < count {
        return Err(HarnessError::Checkpoint("truncated".into()));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let mut b = [0u8; 8];
        read_exact(rd, &mut b)?;
        params.push(f64::from_le_bytes(b));
    }
    Ok(Mlp::from_params(&widths, params)?)
}

/// One search node in a `tree_<seed>.json` dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNodeDump {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: u32,
    pub state: Vec<f64>,
    pub action: Option<Vec<f64>>,
    pub reward: f64,
    pub value: f64,
    pub visits: u64,
    pub own_volume: f64,
    pub subtree_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDump {
    pub algorithm: String,
    pub env: String,
    pub size: usize,
    pub seed: u64,
    pub rollouts: usize,
    pub maze: Option<MazeSpec>,
    pub nodes: Vec<TreeNodeDump>,
}

impl TreeDump {
    pub fn new(result: &EpisodeResult, maze: Option<MazeSpec>) -> Self {
        let r = &result.record;
        TreeDump {
            algorithm: r.algorithm.name().into(),
            env: r.env.clone(),
            size: r.size,
            seed: r.seed,
            rollouts: r.rollouts,
            maze,
            nodes: dump_nodes(&result.tree, &result.node_values),
        }
    }
}

pub fn dump_nodes(tree: &SearchTree, values: &[f64]) -> Vec<TreeNodeDump> {
    tree.nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| TreeNodeDump {
            id,
            parent: n.parent,
            depth: n.depth,
            state: n.state.to_vec(),
            action: n.action.map(|a| a.to_vec()),
            reward: n.reward,
            value: values[id],
            visits: n.visit_count,
            own_volume: n.own_volume,
            subtree_volume: n.subtree_volume,
        })
        .collect()
}

/// Nested k-d tree node for debugging dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdDump {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub depth: u32,
    pub value_sum: f64,
    pub visit_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<(usize, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub children: Vec<KdDump>,
}

pub fn dump_kd(kd: &KdTree) -> Option<KdDump> {
    fn go(kd: &KdTree, h: KdHandle) -> KdDump {
        let n = kd.node(h);
        let b: &BoxBounds = n.bounds();
        KdDump {
            low: b.low.to_vec(),
            high: b.high.to_vec(),
            depth: n.depth(),
            value_sum: n.value_sum(),
            visit_count: n.visit_count(),
            point: n.point().map(|p| p.to_vec()),
            split: n.split(),
            children: n
                .children()
                .map(|c| c.iter().map(|&h| go(kd, h)).collect())
                .unwrap_or_default(),
        }
    }
    kd.root().map(|r| go(kd, r))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use vmcts_core::planner::PlannerRng;

    use super::*;

    #[test]
    fn checkpoint_round_trips_bit_exact() {
        let mut rng = PlannerRng::seed_from_u64(3);
        let nets = Nets {
            value: Mlp::new(&[2, 5, 1], &mut rng),
            policy: GaussianPolicy::new(Mlp::new(&[2, 3, 4], &mut rng)).unwrap(),
        };
        let bytes = encode_checkpoint(&nets);
        // header, then value net (3 widths, 21 params), then policy net (3 widths, 25 params)
        assert_eq!(bytes.len(), 16 + (4 + 12 + 21 * 8) + (4 + 12 + 25 * 8));
        let back = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back.value, nets.value);
        assert_eq!(back.policy.net(), nets.policy.net());
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let mut rng = PlannerRng::seed_from_u64(3);
        let nets = Nets {
            value: Mlp::new(&[2, 2, 1], &mut rng),
            policy: GaussianPolicy::new(Mlp::new(&[2, 2, 2], &mut rng)).unwrap(),
        };
        let bytes = encode_checkpoint(&nets);
        assert!(decode_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_checkpoint(&extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_checkpoint(&bad).is_err());
        let mut future = bytes;
        future[8] = 2;
        assert!(decode_checkpoint(&future).is_err());
    }
}
