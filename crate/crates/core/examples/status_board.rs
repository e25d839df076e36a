// SPDX-License-Identifier: MIT OR Apache-2.0

//! The central board: sticky Red, Orange bookkeeping, data warnings and
//! operator acknowledgement.

use koad::board::{Board, BoardEvent};
use koad::engine::{Verdict, VerdictKind};
use koad::validity::{BedId, DataWarning};

fn verdict(kind: VerdictKind, at: u64, resolves: Option<u64>, delta: f64) -> BoardEvent {
    BoardEvent::Verdict(Verdict { kind, at_timestep: at, resolves_timestep: resolves, delta })
}

fn main() {
    let mut board = Board::new(&[BedId(1), BedId(2), BedId(3)]).unwrap();
    let now = 60_000;

    board.apply(BedId(1), &verdict(VerdictKind::Green, 10, None, 0.01), 48_000).unwrap();
    board.apply(BedId(2), &verdict(VerdictKind::Orange, 10, None, 0.11), 50_000).unwrap();
    board.apply(BedId(3), &verdict(VerdictKind::Red1, 10, None, 0.93), 55_000).unwrap();
    board.apply(BedId(1), &BoardEvent::Data(DataWarning::Raised), 59_000).unwrap();
    println!("{}", board.render(0, now));

    board.apply(BedId(3), &verdict(VerdictKind::Green, 11, None, 0.02), 56_000).unwrap();
    board.apply(BedId(2), &verdict(VerdictKind::Red2, 30, Some(10), 0.11), 57_000).unwrap();
    println!("{}", board.render(1, now));

    println!("ack bed 3: {:?}", board.acknowledge(BedId(3)).unwrap());
    println!("ack bed 1: {:?}", board.acknowledge(BedId(1)).unwrap());
    board.apply(BedId(1), &BoardEvent::Data(DataWarning::Cleared), 60_000).unwrap();
    println!("{}", board.render(2, now));
}
