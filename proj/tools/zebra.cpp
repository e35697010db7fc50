// SPDX-License-Identifier: Apache-2.0
#include "zebra/cli.hpp"

int main(int argc, char** argv) { return zebra::cli::run_cli(argc, argv); }
