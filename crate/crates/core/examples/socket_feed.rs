// SPDX-License-Identifier: MIT OR Apache-2.0

//! A transceiver thread serving records over TCP and a socket source
//! reading them, as the bedside host and central host would.

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use koad::ingest::source::{serve_records, FrameSource, MemorySource, Next, SocketSource};
use koad::ingest::SyntheticSpec;

fn main() {
    let s = SyntheticSpec::vital_signs(4, 20, 9).generate().unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();

    // 12 s cadence played 600x faster
    let feed = MemorySource::new(s.records.clone(), Duration::from_secs(12), 600.0);
    let server = thread::spawn(move || serve_records(&listener, feed).unwrap());

    let mut client = SocketSource::new(addr.clone(), Duration::from_millis(200));
    let mut got = 0;
    let mut idle = 0;
    while got < s.records.len() && idle < 10 {
        match client.next_frame().unwrap() {
            Next::Frame(line) => {
                got += 1;
                println!("{addr} -> {line}");
            }
            Next::Idle => idle += 1,
            Next::End => break,
        }
    }
    println!("received {got} records, {} sent", server.join().unwrap());
}
