// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    let code = chain_transport::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
