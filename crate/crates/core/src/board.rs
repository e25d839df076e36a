// SPDX-License-Identifier: MIT OR Apache-2.0

//! Central status board for up to five beds.
//!
//! Red is latched: once a bed goes Red it stays Red until an operator
//! acknowledges it, whatever the detector says afterwards. The data badge
//! is independent of the clinical state, and the console warning is on
//! while any bed carries the badge.

use std::fmt::Write as _;

use crate::engine::{Verdict, VerdictKind};
use crate::validity::{BedId, DataWarning, Millis};

pub const MAX_BEDS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TileState {
    Green,
    Orange,
    Red,
    DataWarning,
    Unoccupied,
}

impl TileState {
    pub fn word(&self) -> &'static str {
        match self {
            Self::Green => "GREEN",
            Self::Orange => "ORANGE",
            Self::Red => "RED",
            Self::DataWarning => "NO DATA",
            Self::Unoccupied => "Unoccupied",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BedTile {
    pub bed: BedId,
    red_latched: bool,
    seen_verdict: bool,
    pub data_warning: bool,
    pub last_delta: Option<f64>,
    pub last_update: Option<Millis>,
    pub open_orange_count: u32,
}

impl BedTile {
    fn new(bed: BedId) -> Self {
        Self {
            bed,
            red_latched: false,
            seen_verdict: false,
            data_warning: false,
            last_delta: None,
            last_update: None,
            open_orange_count: 0,
        }
    }

    /// What the detector currently says, ignoring the Red latch.
    fn underlying(&self) -> TileState {
        if !self.seen_verdict {
            TileState::Unoccupied
        } else if self.open_orange_count > 0 {
            TileState::Orange
        } else {
            TileState::Green
        }
    }

    /// Clinical state shown on the tile. A bed with only a data warning
    /// and no verdict yet shows `DataWarning`.
    pub fn state(&self) -> TileState {
        if self.red_latched {
            TileState::Red
        } else {
            match self.underlying() {
                TileState::Unoccupied if self.data_warning => TileState::DataWarning,
                s => s,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    /// Red1 and Red2 events applied.
    pub detected: u64,
    /// Red tiles acknowledged.
    pub addressed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoardEvent {
    Verdict(Verdict),
    Data(DataWarning),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("bed {0} is not on this board")]
    UnknownBed(BedId),
    #[error("board holds at most {MAX_BEDS} beds; got {0}")]
    TooManyBeds(usize),
    #[error("bed {0} listed twice")]
    DuplicateBed(BedId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AckOutcome {
    Cleared,
    /// The tile was not Red; nothing changed.
    NotRed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Board {
    tiles: Vec<BedTile>,
    summary: Summary,
    console_warning: bool,
}

impl Board {
    pub fn new(beds: &[BedId]) -> Result<Self, BoardError> {
        if beds.len() > MAX_BEDS {
            return Err(BoardError::TooManyBeds(beds.len()));
        }
        for (i, b) in beds.iter().enumerate() {
            if beds[..i].contains(b) {
                return Err(BoardError::DuplicateBed(*b));
            }
        }
        Ok(Self {
            tiles: beds.iter().map(|&b| BedTile::new(b)).collect(),
            summary: Summary::default(),
            console_warning: false,
        })
    }

    pub fn tiles(&self) -> &[BedTile] {
        &self.tiles
    }

    pub fn tile(&self, bed: BedId) -> Option<&BedTile> {
        self.tiles.iter().find(|t| t.bed == bed)
    }

    pub fn summary(&self) -> Summary {
        self.summary
    }

    pub fn console_warning(&self) -> bool {
        self.console_warning
    }

    fn tile_mut(&mut self, bed: BedId) -> Result<&mut BedTile, BoardError> {
        self.tiles.iter_mut().find(|t| t.bed == bed).ok_or(BoardError::UnknownBed(bed))
    }

    pub fn apply(&mut self, bed: BedId, event: &BoardEvent, at: Millis) -> Result<(), BoardError> {
        let tile = self.tile_mut(bed)?;
        tile.last_update = Some(at);
        let mut red = false;
        match event {
            BoardEvent::Verdict(v) => {
                tile.seen_verdict = true;
                if !v.is_resolution() {
                    tile.last_delta = Some(v.delta);
                }
                match v.kind {
                    VerdictKind::Orange => tile.open_orange_count += 1,
                    VerdictKind::Green | VerdictKind::Red2 if v.is_resolution() => {
                        tile.open_orange_count = tile.open_orange_count.saturating_sub(1);
                    }
                    _ => {}
                }
                if v.kind.is_red() {
                    tile.red_latched = true;
                    red = true;
                }
            }
            BoardEvent::Data(w) => tile.data_warning = *w == DataWarning::Raised,
        }
        if red {
            self.summary.detected += 1;
        }
        self.console_warning = self.tiles.iter().any(|t| t.data_warning);
        Ok(())
    }

    pub fn acknowledge(&mut self, bed: BedId) -> Result<AckOutcome, BoardError> {
        let tile = self.tile_mut(bed)?;
        if !tile.red_latched {
            return Ok(AckOutcome::NotRed);
        }
        tile.red_latched = false;
        self.summary.addressed += 1;
        Ok(AckOutcome::Cleared)
    }

    /// Fixed-width text screen. `phase` alternates the flashing glyphs of
    /// Red and Orange tiles; `now` dates the age column.
    pub fn render(&self, phase: u64, now: Millis) -> String {
        const RULE: &str = "==============================================================";
        let flash_on = phase % 2 == 0;
        let mut out = String::new();
        let _ = writeln!(out, "KOAD CENTRAL MONITOR");
        let _ = writeln!(out, "{RULE}");
        let _ = writeln!(out, " slot  bed     state           delta      age  data");
        for slot in 0..MAX_BEDS {
            let Some(tile) = self.tiles.get(slot) else {
                let _ = writeln!(out, " [{}]   {:<6}  {:<14}", slot + 1, "-", TileState::Unoccupied.word());
                continue;
            };
            let state = tile.state();
            let flashing = matches!(state, TileState::Red | TileState::Orange);
            let glyph = if flashing && flash_on { '*' } else { ' ' };
            let word = format!("{glyph} {:<10}{glyph}", state.word());
            let delta = tile.last_delta.map_or("-".to_string(), |d| format!("{d:.4}"));
            let age = tile
                .last_update
                .map_or("-".to_string(), |t| format!("{}s", now.saturating_sub(t) / 1000));
            let badge = if tile.data_warning { "DATA!" } else { "" };
            let _ = writeln!(
                out,
                " [{}]   {:<6}  {:<14} {:>8} {:>8}  {}",
                slot + 1,
                format!("bed {}", tile.bed),
                word,
                delta,
                age,
                badge
            );
        }
        let _ = writeln!(out, "{RULE}");
        let _ = writeln!(
            out,
            " emergency events detected: {}   addressed: {}",
            self.summary.detected, self.summary.addressed
        );
        let red: Vec<String> = self
            .tiles
            .iter()
            .filter(|t| t.state() == TileState::Red)
            .map(|t| t.bed.to_string())
            .collect();
        if !red.is_empty() {
            let _ = writeln!(out, " !!! EMERGENCY at bed {} !!!", red.join(", "));
        }
        if self.console_warning {
            let beds: Vec<String> =
                self.tiles.iter().filter(|t| t.data_warning).map(|t| t.bed.to_string()).collect();
            let _ = writeln!(out, " /!\\ DATA WARNING: no valid data from bed {}", beds.join(", "));
        }
        out
    }
}
