#include "fabricnet/offload.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>

#include "fabricnet/net.hpp"

namespace fabricnet::offload {
namespace {

constexpr double kEps = 1e-12;

bool transferring(State s) { return s == State::ToEdge || s == State::ToDevice; }

void log_entry(OffloadSession& s, State entered, bool failure = false) {
  s.state = entered;
  s.event_log.push_back({s.clock_s, entered, failure});
}

}  // namespace

const char* state_name(State s) {
  switch (s) {
    case State::Local: return "local";
    case State::ToEdge: return "to_edge";
    case State::Edge: return "edge";
    case State::ToDevice: return "to_device";
  }
  return "?";
}

OffloadSession make_session(std::string device_id, double t0) {
  OffloadSession s;
  s.device_id = std::move(device_id);
  s.clock_s = t0;
  log_entry(s, State::Local);
  return s;
}

Action decide(const OffloadSession& session, const predict::Prediction& p,
              const OffloadPolicyConfig& cfg) {
  if (transferring(session.state))
    throw std::logic_error("decide: session is mid-transfer");
  const double score = p.mean_bps - p.margin_bps;
  if (session.state == State::Local)
    return score >= cfg.threshold_up_bps ? Action::StartOffload : Action::Stay;
  return score < cfg.threshold_down_bps ? Action::StartOnboard : Action::Stay;
}

void apply_action(OffloadSession& session, Action action, const OffloadPolicyConfig& cfg) {
  switch (action) {
    case Action::Stay:
      return;
    case Action::StartOffload:
      if (session.state != State::Local)
        throw std::logic_error("apply_action: StartOffload requires Local");
      session.remaining_s = cfg.t_offload_s;
      session.deficit_clock_s = 0.0;
      log_entry(session, State::ToEdge);
      if (session.remaining_s <= kEps) {
        session.remaining_s = 0.0;
        log_entry(session, State::Edge);
      }
      return;
    case Action::StartOnboard:
      if (session.state != State::Edge)
        throw std::logic_error("apply_action: StartOnboard requires Edge");
      session.remaining_s = cfg.t_onboard_s;
      session.deficit_clock_s = 0.0;
      log_entry(session, State::ToDevice);
      if (session.remaining_s <= kEps) {
        session.remaining_s = 0.0;
        log_entry(session, State::Local);
      }
      return;
  }
}

void step(OffloadSession& session, double measured_ul_bps, double dt,
          const OffloadPolicyConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be > 0");
  double left = dt;
  while (left > kEps) {
    double piece = left;
    if (transferring(session.state)) piece = std::min(piece, session.remaining_s);

    if (session.state == State::ToEdge || session.state == State::Edge) {
      if (measured_ul_bps < cfg.required_bps) {
        session.deficit_clock_s += piece;
        if (session.deficit_clock_s > cfg.fail_grace_s + kEps) {
          session.clock_s += piece;
          left -= piece;
          session.deficit_clock_s = 0.0;
          session.remaining_s = 0.0;
          log_entry(session, State::Local, true);
          continue;
        }
      } else {
        session.deficit_clock_s = 0.0;
      }
    }

    session.clock_s += piece;
    left -= piece;
    if (transferring(session.state)) {
      session.remaining_s -= piece;
      if (session.remaining_s <= kEps) {
        session.remaining_s = 0.0;
        log_entry(session, session.state == State::ToEdge ? State::Edge : State::Local);
      }
    }
  }
}

OffloadMetrics offload_metrics(std::span<const OffloadEvent> log, double run_length_s) {
  if (log.empty()) throw std::invalid_argument("offload_metrics: empty event log");
  if (run_length_s <= 0.0) throw std::invalid_argument("offload_metrics: run_length must be > 0");
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].t < log[i - 1].t) throw std::invalid_argument("offload_metrics: unordered log");
  }

  const double t0 = log.front().t;
  const double t_end = t0 + run_length_s;
  double by_state[4] = {0.0, 0.0, 0.0, 0.0};
  OffloadMetrics m;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double begin = std::min(log[i].t, t_end);
    const double end = std::min(i + 1 < log.size() ? log[i + 1].t : t_end, t_end);
    by_state[static_cast<int>(log[i].entered)] += end - begin;
    if (log[i].entered == State::ToEdge || log[i].entered == State::ToDevice) ++m.replacements;
    if (log[i].failure) ++m.failures;
  }
  m.local_time_pct = 100.0 * by_state[static_cast<int>(State::Local)] / run_length_s;
  m.offload_time_pct = 100.0 * by_state[static_cast<int>(State::Edge)] / run_length_s;
  m.transfer_time_pct = 100.0 *
                        (by_state[static_cast<int>(State::ToEdge)] +
                         by_state[static_cast<int>(State::ToDevice)]) /
                        run_length_s;
  return m;
}

const char* offload_policy_name(OffloadPolicy p) {
  switch (p) {
    case OffloadPolicy::Oracle: return "oracle";
    case OffloadPolicy::Reactive: return "reactive";
    case OffloadPolicy::Knn: return "knn";
    case OffloadPolicy::Forest: return "forest";
    case OffloadPolicy::Ar: return "ar";
  }
  return "?";
}

bool parse_offload_policy(std::string_view name, OffloadPolicy& out) {
  if (name == "oracle") out = OffloadPolicy::Oracle;
  else if (name == "reactive") out = OffloadPolicy::Reactive;
  else if (name == "knn") out = OffloadPolicy::Knn;
  else if (name == "forest") out = OffloadPolicy::Forest;
  else if (name == "ar") out = OffloadPolicy::Ar;
  else return false;
  return true;
}

std::vector<predict::TraceSample> generate_qos_trace(const OffloadScenario& sc,
                                                     std::uint64_t seed, double length_s,
                                                     std::string_view stream_id) {
  if (sc.factory.agvs.empty())
    throw std::invalid_argument("generate_qos_trace: scenario has no AGV");
  if (sc.trace_dt_s <= 0.0) throw std::invalid_argument("generate_qos_trace: trace_dt must be > 0");

  const factory::Agv& agv = sc.factory.agvs.front();
  const double bandwidth_hz = sc.total_prbs * sc.prb_bandwidth_hz;
  const double horizon = sc.horizon_s;
  const std::size_t n = static_cast<std::size_t>(std::llround((length_s + horizon) / sc.trace_dt_s)) + 1;

  sim::RngStream rng(seed, stream_id);
  radio::ShadowingState shadow;
  std::vector<predict::TraceSample> trace(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * sc.trace_dt_s;
    const geom::Vec2 pos = factory::agv_position(agv, t);
    const double base_rss =
        sc.prop.tx_power_dbm - radio::path_loss_motley_keenan(sc.ap_position, pos,
                                                              sc.factory.layout, sc.prop);
    const double rss = base_rss + radio::advance_shadowing(shadow, pos, rng, sc.shadowing);
    const double sinr = net::sinr_db(rss, {}, sc.prop.noise_floor_dbm);
    const double rate = net::rate_from_sinr(sinr, bandwidth_hz, sc.cap_se);
    trace[i] = {t, pos.x, pos.y, factory::production_status(sc.factory, t).cycle_phase, rate};
  }
  return trace;
}

predict::TrainingSet build_offload_training_set(const OffloadScenario& sc,
                                                std::span<const predict::TraceSample> trace) {
  const std::size_t w =
      static_cast<std::size_t>(std::llround(sc.horizon_s / sc.trace_dt_s)) + 1;
  if (trace.size() < w)
    throw std::invalid_argument("build_offload_training_set: trace shorter than horizon");

  predict::TrainingSet train;
  train.reserve(trace.size() - w + 1);
  std::deque<std::size_t> window;  // indices of increasing ul, sliding minimum
  for (std::size_t i = 0; i < trace.size(); ++i) {
    while (!window.empty() && trace[window.back()].ul_bps >= trace[i].ul_bps) window.pop_back();
    window.push_back(i);
    if (i + 1 < w) continue;
    const std::size_t begin = i + 1 - w;
    while (window.front() < begin) window.pop_front();
    const predict::TraceSample& s = trace[begin];
    train.push_back({s.x, s.y, s.phase, trace[window.front()].ul_bps});
  }
  return train;
}

OffloadRunResult run_offload_experiment(const OffloadScenario& sc, OffloadPolicy policy,
                                        std::uint64_t seed) {
  if (sc.epoch_s <= 0.0 || sc.horizon_s <= 0.0)
    throw std::invalid_argument("run_offload_experiment: epoch and horizon must be > 0");
  if (sc.policy.threshold_down_bps > sc.policy.threshold_up_bps)
    throw std::invalid_argument("run_offload_experiment: threshold_down exceeds threshold_up");

  OffloadRunResult result;
  result.qos_trace = generate_qos_trace(sc, seed, sc.run_length_s, "offload/qos");
  const std::vector<predict::TraceSample>& trace = result.qos_trace;

  predict::KnnModel knn;
  predict::ForestModel forest;
  predict::ArModel ar;
  if (policy == OffloadPolicy::Knn || policy == OffloadPolicy::Forest ||
      policy == OffloadPolicy::Ar) {
    const std::vector<predict::TraceSample> train_trace =
        generate_qos_trace(sc, sc.train_seed, sc.train_length_s, "offload/train");
    if (policy == OffloadPolicy::Knn) {
      knn = predict::knn_fit(build_offload_training_set(sc, train_trace), sc.knn_k,
                             predict::FeatureScales{}, sc.factory.phase_count, sc.knn_margin_z);
    } else if (policy == OffloadPolicy::Forest) {
      forest = predict::forest_fit(build_offload_training_set(sc, train_trace), sc.forest_trees,
                                   sc.forest_max_depth, sim::RngStream(sc.train_seed, "offload/forest"),
                                   sc.forest_margin_z);
    } else {
      std::vector<double> series(train_trace.size());
      for (std::size_t i = 0; i < train_trace.size(); ++i) series[i] = train_trace[i].ul_bps;
      ar = predict::ar_fit(series, sc.ar_order);
    }
  }

  const std::size_t epoch_ticks =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sc.epoch_s / sc.trace_dt_s)));
  const int ar_steps = std::max(1, static_cast<int>(std::llround(sc.horizon_s / sc.trace_dt_s)));
  const std::size_t n_ticks =
      static_cast<std::size_t>(std::llround(sc.run_length_s / sc.trace_dt_s));

  OffloadSession session = make_session(sc.factory.agvs.front().id);
  std::vector<double> recent_ul;
  recent_ul.reserve(n_ticks);
  double last_failure_t = -1.0;

  auto predict_now = [&](std::size_t i) -> predict::Prediction {
    const double t = trace[i].t;
    switch (policy) {
      case OffloadPolicy::Oracle:
        return predict::predict_oracle(trace, t, sc.horizon_s);
      case OffloadPolicy::Reactive: {
        predict::PredictorQuery q;
        q.recent = std::span<const predict::TraceSample>(trace).subspan(i, 1);
        q.horizon_s = sc.horizon_s;
        return predict::predict_reactive(q);
      }
      case OffloadPolicy::Knn:
      case OffloadPolicy::Forest: {
        predict::PredictorQuery q;
        q.x = trace[i].x;
        q.y = trace[i].y;
        q.phase = trace[i].phase;
        q.horizon_s = sc.horizon_s;
        return policy == OffloadPolicy::Knn ? predict::knn_predict(knn, q)
                                            : predict::forest_predict(forest, q);
      }
      case OffloadPolicy::Ar:
        return predict::ar_predict(ar, recent_ul, ar_steps, sc.ar_margin_z, sc.horizon_s);
    }
    throw std::logic_error("run_offload_experiment: unknown policy");
  };

  for (std::size_t i = 0; i < n_ticks; ++i) {
    recent_ul.push_back(trace[i].ul_bps);
    const bool epoch = i % epoch_ticks == 0;
    const bool stable = session.state == State::Local || session.state == State::Edge;
    const bool recovering = session.state == State::Local && last_failure_t >= 0.0 &&
                            session.clock_s < last_failure_t + sc.recovery_s;
    const bool ar_ready = policy != OffloadPolicy::Ar ||
                          recent_ul.size() >= static_cast<std::size_t>(std::max(ar.order, 1));
    if (epoch && stable && !recovering && ar_ready) {
      apply_action(session, decide(session, predict_now(i), sc.policy), sc.policy);
    }
    step(session, trace[i].ul_bps, sc.trace_dt_s, sc.policy);
    if (session.event_log.back().failure) last_failure_t = session.event_log.back().t;
  }

  result.events = session.event_log;
  result.metrics = offload_metrics(result.events, sc.run_length_s);
  return result;
}

}  // namespace fabricnet::offload
