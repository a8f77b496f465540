// SPDX-License-Identifier: Apache-2.0
#ifndef SEQX_CLI_HPP
#define SEQX_CLI_HPP

namespace seqx {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitCheckFailure = 2;

/// Subcommands: gen-data, train, eval, score, check-exact.
int cli_main(int argc, const char* const* argv);

}  // namespace seqx

#endif  // SEQX_CLI_HPP
