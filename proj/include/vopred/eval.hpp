#pragma once

#include "vopred/engine.hpp"

#include <iosfwd>

namespace vopred {

enum class EvalMode { Deterministic, BestOfN };

std::string evalModeName(EvalMode mode);

// One evaluated agent in one sliding window.
struct WindowAgentResult {
  long start_frame = 0;
  int agent_id = 0;
  double ade = 0.0;
  double fde = 0.0;
  std::vector<Vec2> predicted;
  std::vector<Vec2> truth;
};

struct EvalResult {
  std::string scene;
  EvalMode mode = EvalMode::Deterministic;
  double ade = 0.0;  // mean over agent-windows
  double fde = 0.0;
  int windows = 0;        // windows contributing at least one agent
  int agent_windows = 0;  // evaluated (window, agent) pairs
  double wall_seconds = 0.0;
  std::vector<WindowAgentResult> details;
};

// Sliding-window benchmark: observe t_hist frames, filter the behavior
// posteriors along them, predict t_pred_steps frames, and score ADE/FDE per
// agent. Windows slide by one frame; agents missing any of the window's
// frames sit the window out. BestOfN perturbs every agent's intention
// reference with Gaussian noise sigma_s per sample and keeps, per agent, the
// sample closest to ground truth (sample sets are prefix-nested in n).
EvalResult evaluate(const Engine& engine, const TrajectoryDataset& dataset, EvalMode mode,
                    const std::string& scene_name);

// Machine-readable outputs: a JSON summary (one record per scene) and a CSV
// of per-window predicted/truth points.
void writeSummary(const std::vector<EvalResult>& results, std::ostream& out);
void writeTraces(const EvalResult& result, std::ostream& out);

// Deterministic seed stream shared by sampling and simulation noise.
std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace vopred
