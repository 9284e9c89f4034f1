#include "rosyn/serialize.hpp"

#include <cstdio>

#include "json_detail.hpp"

namespace rosyn {

using nlohmann::json;
using detail::matrix_from_json;
using detail::matrix_to_json;
using detail::vector_to_json;

std::string to_json(const SlsResponse& omega) {
  json j;
  j["R"] = matrix_to_json(omega.R);
  j["N"] = matrix_to_json(omega.N);
  j["M"] = matrix_to_json(omega.M);
  j["L"] = matrix_to_json(omega.L);
  return j.dump(2);
}

SlsResponse response_from_json(const std::string& text) {
  const json j = json::parse(text);
  SlsResponse w;
  w.R = matrix_from_json(j.at("R"));
  w.N = matrix_from_json(j.at("N"));
  w.M = matrix_from_json(j.at("M"));
  w.L = matrix_from_json(j.at("L"));
  return w;
}

namespace {

const char* to_string(RegretStatus s) {
  switch (s) {
    case RegretStatus::Optimal: return "optimal";
    case RegretStatus::UnboundedRegret: return "unbounded_regret";
    case RegretStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

json certificate_json(const RegretCertificate& cert) {
  json j;
  j["status"] = to_string(cert.status);
  j["lambda_star"] = cert.lambda_star;
  j["mu_star"] = cert.mu_star;
  j["slack_min_eig"] = cert.slack_min_eig;
  j["attack"] = vector_to_json(cert.attack);
  j["achieved_regret"] = cert.achieved_regret;
  j["stealth_level"] = cert.stealth_level;
  j["sdp_iterations"] = cert.sdp_iterations;
  return j;
}

}  // namespace

std::string to_json(const RegretCertificate& cert) {
  return certificate_json(cert).dump(2);
}

std::string to_json(const SynthesisResult& result) {
  json j;
  j["strategy"] = to_string(result.strategy);
  j["lambda"] = result.lambda;
  j["mu_bar"] = result.mu_bar;
  j["shor_lower_bound"] = result.shor_lower_bound;
  j["rank_converged"] = result.rank_converged;
  j["omega"] = json::parse(to_json(result.omega));
  j["gain"] = matrix_to_json(result.gain);
  j["certificate"] = certificate_json(result.certificate);
  json log = json::array();
  for (const auto& it : result.irm_log) {
    log.push_back({{"iteration", it.iteration},
                   {"sigma_ratio", it.sigma_ratio},
                   {"objective", it.objective},
                   {"certified_mu", it.certified_mu}});
  }
  j["irm_log"] = log;
  return j.dump(2);
}

std::string format_csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string summary_csv_header() {
  return "strategy,T,alpha,lambda,mu,shor_bound,wallclock_s";
}

std::string summary_csv_row(const SynthesisResult& result, int horizon,
                            double alpha, double wallclock_s) {
  std::string row = to_string(result.strategy);
  row += ',';
  row += std::to_string(horizon);
  row += ',';
  row += format_csv_double(alpha);
  row += ',';
  row += format_csv_double(result.certificate.lambda_star);
  row += ',';
  row += format_csv_double(result.certificate.mu_star);
  row += ',';
  row += format_csv_double(result.shor_lower_bound);
  row += ',';
  row += format_csv_double(wallclock_s);
  return row;
}

}  // namespace rosyn
