#include "vopred/eval.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace vopred {

namespace {

constexpr double kHeadingSpeedFloor = 0.05;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct WindowTask {
  size_t ordinal = 0;     // index into the sorted frame list
  std::vector<int> ids;   // agents present in all window frames
};

// Ground-truth lookup for one window, ordinal-indexed.
struct WindowFrames {
  const TrajectoryDataset* dataset = nullptr;
  const std::vector<long>* frames = nullptr;
  size_t start = 0;

  const ObservationRow& row(size_t offset, int id) const {
    const ObservationRow* r = dataset->find((*frames)[start + offset], id);
    return *r;  // presence established when the task was built
  }
};

}  // namespace

std::string evalModeName(EvalMode mode) {
  return mode == EvalMode::Deterministic ? "det" : "best_of_n";
}

std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

EvalResult evaluate(const Engine& engine, const TrajectoryDataset& dataset, EvalMode mode,
                    const std::string& scene_name) {
  const auto t0 = std::chrono::steady_clock::now();
  const EngineConfig& cfg = engine.config();
  const int observe = cfg.t_hist;
  const int horizon = cfg.t_pred_steps;
  const int span = observe + horizon;

  EvalResult result;
  result.scene = scene_name;
  result.mode = mode;

  const std::vector<long> frames = dataset.frameIndices();
  if (static_cast<int>(frames.size()) < span) {
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  // Uniform stride across a window; windows spanning a recording gap drop out.
  long stride = 0;
  for (size_t i = 1; i < frames.size(); ++i) {
    const long d = frames[i] - frames[i - 1];
    if (stride == 0 || d < stride) stride = d;
  }

  std::vector<WindowTask> tasks;
  for (size_t k = 0; k + span <= frames.size(); ++k) {
    bool uniform = true;
    for (int j = 1; j < span && uniform; ++j) {
      if (frames[k + j] - frames[k + j - 1] != stride) uniform = false;
    }
    if (!uniform) continue;
    WindowTask task;
    task.ordinal = k;
    const std::vector<ObservationRow>& first = dataset.frames.at(frames[k]);
    for (const ObservationRow& row : first) {
      bool everywhere = true;
      for (int j = 1; j < span && everywhere; ++j) {
        if (dataset.find(frames[k + j], row.agent_id) == nullptr) everywhere = false;
      }
      if (everywhere) task.ids.push_back(row.agent_id);
    }
    if (!task.ids.empty()) tasks.push_back(std::move(task));
  }

  std::vector<std::vector<WindowAgentResult>> slots(tasks.size());
  std::atomic<size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto runWindow = [&](const WindowTask& task, std::vector<WindowAgentResult>& out) {
    WindowFrames gt{&dataset, &frames, task.ordinal};

    WorldState world;
    world.dt = cfg.dt;
    world.tau = cfg.tau;
    world.t_pred_steps = cfg.t_pred_steps;
    world.obstacles = dataset.obstacles;
    for (int id : task.ids) {
      const ObservationRow& row = gt.row(0, id);
      AgentState agent = engine.makeAgent(id, row.type, row.footprint_dims);
      agent.position = row.position;
      agent.heading = row.heading.value_or(0.0);
      agent.history.push(static_cast<long>(task.ordinal), row.position);
      world.agents.push_back(std::move(agent));
    }

    // Filter the behavior posteriors along the observed frames, advancing
    // every agent on its ground-truth motion.
    for (int t = 1; t < observe; ++t) {
      std::map<int, Vec2> observed;
      for (int id : task.ids) observed.emplace(id, gt.row(static_cast<size_t>(t), id).position);
      engine.filterUpdate(world, observed);
      for (AgentState& agent : world.agents) {
        const ObservationRow& row = gt.row(static_cast<size_t>(t), agent.id);
        const Vec2 prev = agent.position;
        agent.position = row.position;
        agent.velocity = (row.position - prev) / cfg.dt;
        if (row.heading) {
          agent.heading = *row.heading;
        } else if (agent.velocity.norm() > kHeadingSpeedFloor) {
          agent.heading = std::atan2(agent.velocity.y(), agent.velocity.x());
        }
        agent.history.push(static_cast<long>(task.ordinal) + t, agent.position);
      }
    }

    auto score = [&](const std::map<int, std::vector<Vec2>>& prediction, int id) {
      std::vector<Vec2> truth;
      truth.reserve(static_cast<size_t>(horizon));
      for (int j = 0; j < horizon; ++j) {
        truth.push_back(gt.row(static_cast<size_t>(observe + j), id).position);
      }
      const auto [ade, fde] = adeFde(prediction.at(id), truth);
      WindowAgentResult r;
      r.start_frame = frames[task.ordinal];
      r.agent_id = id;
      r.ade = ade;
      r.fde = fde;
      r.predicted = prediction.at(id);
      r.truth = std::move(truth);
      return r;
    };

    std::vector<int> eval_ids;
    for (const AgentState& a : world.agents) {
      if (a.type != AgentType::StaticObstacle) eval_ids.push_back(a.id);
    }

    if (mode == EvalMode::Deterministic) {
      const auto prediction = engine.predict(world, horizon);
      for (int id : eval_ids) out.push_back(score(prediction, id));
      return;
    }

    // Best-of-n: joint rollouts under per-agent reference noise; each agent
    // keeps its own best sample.
    std::map<int, WindowAgentResult> best;
    for (int sample = 0; sample < cfg.best_of_n; ++sample) {
      std::map<int, Vec2> offsets;
      std::mt19937_64 rng(mixSeed(cfg.seed, static_cast<std::uint64_t>(frames[task.ordinal]),
                                  static_cast<std::uint64_t>(sample)));
      std::normal_distribution<double> noise(0.0, cfg.sigma_s);
      for (int id : task.ids) {
        const double nx = noise(rng);
        const double ny = noise(rng);
        offsets.emplace(id, Vec2(nx, ny));
      }
      const auto prediction = engine.predict(world, horizon, &offsets);
      for (int id : eval_ids) {
        WindowAgentResult r = score(prediction, id);
        const auto it = best.find(id);
        if (it == best.end() || r.ade < it->second.ade) best[id] = std::move(r);
      }
    }
    for (int id : eval_ids) out.push_back(best.at(id));
  };

  int n_threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(tasks.size())));
  auto worker = [&] {
    for (;;) {
      const size_t k = cursor.fetch_add(1);
      if (k >= tasks.size()) return;
      try {
        runWindow(tasks[k], slots[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  double ade_sum = 0.0, fde_sum = 0.0;
  for (std::vector<WindowAgentResult>& slot : slots) {
    if (!slot.empty()) ++result.windows;
    for (WindowAgentResult& r : slot) {
      ade_sum += r.ade;
      fde_sum += r.fde;
      ++result.agent_windows;
      result.details.push_back(std::move(r));
    }
  }
  if (result.agent_windows > 0) {
    result.ade = ade_sum / result.agent_windows;
    result.fde = fde_sum / result.agent_windows;
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void writeSummary(const std::vector<EvalResult>& results, std::ostream& out) {
  nlohmann::json doc = nlohmann::json::array();
  for (const EvalResult& r : results) {
    doc.push_back({{"scene", r.scene},
                   {"mode", evalModeName(r.mode)},
                   {"ade", r.ade},
                   {"fde", r.fde},
                   {"windows", r.windows},
                   {"agent_windows", r.agent_windows},
                   {"wall_seconds", r.wall_seconds}});
  }
  out << doc.dump(2) << "\n";
}

void writeTraces(const EvalResult& result, std::ostream& out) {
  out << "window,agent,step,pred_x,pred_y,truth_x,truth_y\n";
  char buf[160];
  for (const WindowAgentResult& r : result.details) {
    for (size_t j = 0; j < r.predicted.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%ld,%d,%zu,%.6f,%.6f,%.6f,%.6f\n", r.start_frame,
                    r.agent_id, j + 1, r.predicted[j].x(), r.predicted[j].y(), r.truth[j].x(),
                    r.truth[j].y());
      out << buf;
    }
  }
}

}  // namespace vopred
