// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/cli.hpp"

int main(int argc, char** argv) { return diecg::run_cli(argc, argv); }
