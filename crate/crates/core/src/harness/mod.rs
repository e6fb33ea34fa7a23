// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Verification oracle, instance generators and the scenario runner.

pub mod fidelity;
pub mod fixtures;
pub mod generate;
pub mod instances;
pub mod random;
pub mod report;
pub mod runner;
pub mod scenario;
