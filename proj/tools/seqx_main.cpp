// SPDX-License-Identifier: Apache-2.0
#include "seqx/cli.hpp"

int main(int argc, char** argv) { return seqx::cli_main(argc, argv); }
