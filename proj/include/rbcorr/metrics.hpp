#pragma once

#include <span>
#include <string>

#include "rbcorr/types.hpp"

namespace rbcorr {

LabelDistribution uniform_distribution(const OptionSpace& space, int n = 0);

/// Argmax over labels of (option_logprob - term offset); ties break to the
/// earliest label in canonical order. Throws Error when the term does not
/// cover the record's option space.
std::string respond(const LogProbRecord& record, const CorrectionTerm& term);

LabelDistribution response_distribution(
    std::span<const LogProbRecord> records, const CorrectionTerm& term);

/// Total variation distance: half the L1 distance between two distributions
/// over the same option space.
double tvd(const LabelDistribution& g, const LabelDistribution& m);

double accuracy(std::span<const LogProbRecord> records,
                const CorrectionTerm& term);

/// Population standard deviation of per-class recalls. Every gold class must
/// appear at least once.
double rstd(std::span<const LogProbRecord> records,
            const CorrectionTerm& term);

/// Bundles accuracy, tvd (against the uniform reference distribution), rstd,
/// and the response label distribution.
EvalResult eval_all(std::span<const LogProbRecord> records,
                    const CorrectionTerm& term);

}  // namespace rbcorr
