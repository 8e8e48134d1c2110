#pragma once

#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "neu/meta/neu.hpp"
#include "neu/reconfig/chain_json.hpp"

namespace neu::meta {

using reconfig::json;

/// JSON-safe number: non-finite values become strings.
inline json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <typename F>
json neu_result_json(const NeuResult<F>& r) {
  json hist = json::array();
  for (const auto& s : r.history) {
    json row = {{"iteration", s.iteration},
                {"accepted", s.accepted},
                {"candidate_loss_in", number_json(s.candidate_loss_in)},
                {"perf_in", number_json(s.perf_in)},
                {"perf_out", number_json(s.perf_out)},
                {"note", s.note}};
    row["theta"] = s.theta ? reconfig::detail::theta_json(*s.theta) : json(nullptr);
    hist.push_back(std::move(row));
  }
  return {{"chain", reconfig::chain_to_json(r.chain)},
          {"beta_hat", reconfig::detail::vector_json(r.evaluation.beta_hat)},
          {"gamma_hat", r.evaluation.gamma_hat},
          {"gain", number_json(r.gain)},
          {"perf_in_initial", number_json(r.perf_in_initial)},
          {"perf_out_initial", number_json(r.perf_out_initial)},
          {"perf_in_final", number_json(r.perf_in_final)},
          {"perf_out_final", number_json(r.perf_out_final)},
          {"validation_is_training", r.validation_is_training},
          {"stop_reason", r.stop_reason},
          {"history", std::move(hist)}};
}

template <typename F>
std::string neu_history_csv(const NeuResult<F>& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "iteration,accepted,candidate_loss_in,perf_in,perf_out,note\n";
  for (const auto& s : r.history)
    os << s.iteration << ',' << (s.accepted ? 1 : 0) << ',' << s.candidate_loss_in << ',' << s.perf_in << ','
       << s.perf_out << ",\"" << s.note << "\"\n";
  return os.str();
}

}  // namespace neu::meta
