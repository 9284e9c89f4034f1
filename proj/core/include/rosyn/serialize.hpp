#pragma once

#include <string>

#include "rosyn/regret.hpp"
#include "rosyn/sls.hpp"
#include "rosyn/synthesis.hpp"

namespace rosyn {

/// JSON round trips for the closed-loop response blocks.
std::string to_json(const SlsResponse& omega);
SlsResponse response_from_json(const std::string& text);

/// Certificate document: lambda, mu, attack, slack diagnostics.
std::string to_json(const RegretCertificate& cert);

/// Full synthesis artifact: response, gain, certificate, rank-minimization
/// log and bounds.
std::string to_json(const SynthesisResult& result);

/// One summary.csv row: strategy, T, alpha, lambda, mu, shor_bound,
/// wallclock_s (fixed header, deterministic formatting).
std::string summary_csv_header();
std::string summary_csv_row(const SynthesisResult& result, int horizon,
                            double alpha, double wallclock_s);

/// Deterministic float formatting used by every CSV writer.
std::string format_csv_double(double v);

}  // namespace rosyn
