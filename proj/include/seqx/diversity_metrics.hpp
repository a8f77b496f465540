// SPDX-License-Identifier: Apache-2.0
/**
 * @file diversity_metrics.hpp
 * @brief Set-level diversity of captions generated for one input.
 *
 * Div-n counts distinct n-grams over total words (both pooled across the
 * set). mBleu scores each caption against the rest of the set with
 * sentence-level BLEU-4; lower is more diverse.
 */
#ifndef SEQX_DIVERSITY_METRICS_HPP
#define SEQX_DIVERSITY_METRICS_HPP

#include <span>

#include "seqx/types.hpp"

namespace seqx {

struct DiversityReport {
  double div1 = 0.0;
  double div2 = 0.0;
  double mbleu4 = 0.0;
};

/// Throws ValidationError on sets of fewer than two captions.
void check_caption_set(std::span<const Caption> set);

double div_n(std::span<const Caption> set, int n);
double mbleu(std::span<const Caption> set, int order = 4);
DiversityReport diversity_report(std::span<const Caption> set);

}  // namespace seqx

#endif  // SEQX_DIVERSITY_METRICS_HPP
