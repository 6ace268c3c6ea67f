//! Seeded model of an impaired network link.
//!
//! Messages are delayed by `latency + U[0, jitter]` milliseconds or dropped
//! with probability `loss_rate`. A message never overtakes an earlier one
//! from the same sender: it is delivered late instead.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProtocolError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub latency_ms: u64,
    pub jitter_ms: u64,
    pub loss_rate: f64,
    pub seed: u64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ChannelModel {
    pub fn ideal() -> Self {
        Self {
            latency_ms: 0,
            jitter_ms: 0,
            loss_rate: 0.0,
            seed: 0,
        }
    }

    pub fn new(latency_ms: u64, jitter_ms: u64, loss_rate: f64, seed: u64) -> Result<Self, ProtocolError> {
        let m = Self {
            latency_ms,
            jitter_ms,
            loss_rate,
            seed,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..1.0).contains(&self.loss_rate) {
            return Err(ProtocolError::InvalidChannel(format!(
                "loss rate must be in [0, 1), got {}",
                self.loss_rate
            )));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.latency_ms == 0 && self.jitter_ms == 0 && self.loss_rate == 0.0
    }
}

/// Parses `latency=200,jitter=50,loss=0.1[,seed=7]`. Omitted keys default to
/// zero.
impl FromStr for ChannelModel {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut m = ChannelModel::ideal();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| ProtocolError::InvalidChannel(format!("expected key=value, got `{part}`")))?;
            let bad = |_| ProtocolError::InvalidChannel(format!("bad value for {key}: `{value}`"));
            match key.trim() {
                "latency" => m.latency_ms = value.trim().parse().map_err(bad)?,
                "jitter" => m.jitter_ms = value.trim().parse().map_err(bad)?,
                "seed" => m.seed = value.trim().parse().map_err(bad)?,
                "loss" => {
                    m.loss_rate = value
                        .trim()
                        .parse()
                        .map_err(|_| ProtocolError::InvalidChannel(format!("bad value for loss: `{value}`")))?
                }
                other => return Err(ProtocolError::InvalidChannel(format!("unknown key `{other}`"))),
            }
        }
        m.validate()?;
        Ok(m)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "latency={},jitter={},loss={},seed={}",
            self.latency_ms, self.jitter_ms, self.loss_rate, self.seed
        )
    }
}

/// Stateful channel: one instance per link.
#[derive(Debug, Clone)]
pub struct ImpairedChannel {
    model: ChannelModel,
    rng: ChaCha8Rng,
    last_delivery: HashMap<u64, u64>,
}

impl ImpairedChannel {
    pub fn new(model: ChannelModel) -> Self {
        Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
            last_delivery: HashMap::new(),
        }
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    /// Delivery time of a message sent at `sent_ms`, or `None` if it is lost.
    /// Sends from one sender must be presented in send order.
    pub fn send(&mut self, sender: u64, sent_ms: u64) -> Option<u64> {
        // Both draws happen for every message so the random stream does not
        // depend on earlier outcomes.
        let lost = self.rng.random::<f64>() < self.model.loss_rate;
        let jitter = if self.model.jitter_ms > 0 {
            self.rng.random_range(0..=self.model.jitter_ms)
        } else {
            0
        };
        if lost {
            return None;
        }
        let candidate = sent_ms + self.model.latency_ms + jitter;
        let floor = self.last_delivery.get(&sender).copied().unwrap_or(0);
        let at = candidate.max(floor);
        self.last_delivery.insert(sender, at);
        Some(at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    /// Index into the input sequence.
    pub index: usize,
    pub sender: u64,
    pub sent_ms: u64,
    pub delivered_ms: Option<u64>,
}

/// Schedules a batch of `(sender, sent_ms)` messages, given in send order.
pub fn transmit(model: &ChannelModel, msgs: &[(u64, u64)]) -> Vec<Delivery> {
    let mut ch = ImpairedChannel::new(*model);
    msgs.iter()
        .enumerate()
        .map(|(index, &(sender, sent_ms))| Delivery {
            index,
            sender,
            sent_ms,
            delivered_ms: ch.send(sender, sent_ms),
        })
        .collect()
}
