// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Support code shared by the integration tests and the acceptance runner.

#![allow(dead_code)]

pub mod fixtures;
pub mod fuzz;
pub mod oracle;
pub mod scenario;
pub mod synth;
