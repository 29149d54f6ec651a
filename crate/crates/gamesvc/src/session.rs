use std::collections::HashMap;
use std::sync::Arc;

use rcs_core::files::MeasureFile;
use rcs_core::harness::{MatchState, ScoreRecord, Winner};
use rcs_core::placement::{RivalStrategy, StrategySpec};
use rcs_core::{Domain, GreenKernel, SiteId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ApiError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    AwaitingHuman,
    Finished,
}

/// One human-against-rival match.
pub struct Session {
    pub id: String,
    pub domain: Arc<Domain>,
    pub kernel: Arc<GreenKernel>,
    pub spec: StrategySpec,
    pub rival: RivalStrategy,
    pub state: MatchState,
    pub rounds: Option<usize>,
    pub created_at: u64,
    pub status: Status,
    /// Stored move replies by idempotency key.
    pub replies: HashMap<String, Value>,
}

/// What `GET /sessions/{id}` returns; enough to redraw the whole board.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub id: String,
    pub status: Status,
    pub created_at: u64,
    pub rival: StrategySpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(rename = "match")]
    pub state: MatchState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveReply {
    pub our_score: f64,
    pub rival_score: f64,
    /// Shops the rival placed in answer to this move.
    pub rival_moves: Vec<SiteId>,
    pub winner: Winner,
    pub round: usize,
    #[serde(rename = "fN")]
    pub f_n: usize,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WhatIf {
    pub site: SiteId,
    pub our_score: f64,
    pub rival_score: f64,
}

/// The position as measure files: `mu` scores us against `dx`, `minus` scores the rival.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureExport {
    pub mu: MeasureFile,
    pub minus: MeasureFile,
    pub dx: MeasureFile,
}

impl Session {
    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            status: self.status,
            created_at: self.created_at,
            rival: self.spec.clone(),
            rounds: self.rounds,
            state: self.state.clone(),
        }
    }

    pub fn history(&self) -> &[ScoreRecord] {
        &self.state.history
    }

    /// Applies our move and the rival's answer.
    pub fn play(&mut self, site: SiteId) -> Result<MoveReply, ApiError> {
        if self.status != Status::AwaitingHuman {
            return Err(ApiError::conflict("not-awaiting-human", "the match is finished"));
        }
        let before = self.state.rival_moves.len();
        let rec = self.state.play(&self.domain, &self.kernel, &self.rival, site)?;
        let round_done = self.rounds.is_some_and(|r| self.state.round >= r);
        // a schedule that cannot serve the next round ends the match
        let next_ok = self.rival.check_schedule(&self.state.schedule, self.state.round + 1).is_ok()
            && self.state.schedule.eval(self.state.round + 1).is_ok();
        if round_done || !next_ok {
            self.status = Status::Finished;
        }
        Ok(MoveReply {
            our_score: rec.w_ours,
            rival_score: rec.w_rival,
            rival_moves: self.state.rival_moves.sites[before..].to_vec(),
            winner: rec.winner,
            round: rec.n,
            f_n: rec.f_n,
            status: self.status,
        })
    }

    pub fn whatif(&self, site: SiteId) -> Result<WhatIf, ApiError> {
        let (our_score, rival_score) = self.state.whatif(&self.domain, site)?;
        Ok(WhatIf { site, our_score, rival_score })
    }

    pub fn measures(&self) -> Result<MeasureExport, ApiError> {
        let mu = self.state.measure(&self.domain)?;
        Ok(MeasureExport {
            minus: MeasureFile::from_measure(&mu.negate()),
            mu: MeasureFile::from_measure(&mu),
            dx: MeasureFile::from_measure(&self.domain.volume_measure()),
        })
    }
}
