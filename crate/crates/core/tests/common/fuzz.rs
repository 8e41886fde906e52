// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

/// Random bytes, random printable lines, and mutated real traces.
pub fn fuzz_input(r: &mut rand_chacha::ChaCha8Rng, seeds: &[Vec<u8>]) -> Vec<u8> {
    match r.gen_range(0..4) {
        0 => (0..r.gen_range(0..512)).map(|_| r.gen()).collect(),
        1 => {
            const PIECES: &[&str] = &[
                "\tat ",
                "Caused by: ",
                "Suppressed: ",
                "Traceback (most recent call last):",
                "  File \"",
                "\", line ",
                ", in ",
                "(",
                ")",
                ":",
                ".",
                "$$Lambda$",
                "/0x",
                "... ",
                " more",
                "Exception",
                "\n",
                "\r\n",
                " ",
                "\t",
                "java.lang.X",
                "Error",
                "(Native Method)",
                "(Unknown Source)",
                "During handling of the above exception, another exception occurred:",
                "9999999999999",
                "é",
            ];
            let mut s = String::new();
            for _ in 0..r.gen_range(0..80) {
                s.push_str(PIECES[r.gen_range(0..PIECES.len())]);
            }
            s.into_bytes()
        }
        _ => {
            let mut b = seeds[r.gen_range(0..seeds.len())].clone();
            for _ in 0..r.gen_range(1..8) {
                if b.is_empty() {
                    break;
                }
                let i = r.gen_range(0..b.len());
                match r.gen_range(0..4) {
                    0 => b[i] = r.gen(),
                    1 => b.truncate(i),
                    2 => {
                        b.remove(i);
                    }
                    _ => {
                        let j = r.gen_range(0..b.len());
                        let chunk = b[i.min(j)..i.max(j)].to_vec();
                        b.splice(i..i, chunk);
                    }
                }
            }
            b
        }
    }
}
