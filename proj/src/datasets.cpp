#include "vopred/datasets.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace vopred {

namespace {

[[noreturn]] void rowFail(int row, const std::string& what) {
  throw DatasetError("dataset row " + std::to_string(row) + ": " + what);
}

std::string validTypeList() {
  std::string out;
  for (AgentType t : allAgentTypes()) {
    if (!out.empty()) out += ", ";
    out += agentTypeName(t);
  }
  return out;
}

void insertRow(TrajectoryDataset& ds, long frame, ObservationRow row, int row_number) {
  std::vector<ObservationRow>& rows = ds.frames[frame];
  for (const ObservationRow& r : rows) {
    if (r.agent_id == row.agent_id) {
      rowFail(row_number, "duplicate observation for agent " + std::to_string(row.agent_id) +
                              " in frame " + std::to_string(frame));
    }
  }
  rows.push_back(std::move(row));
}

}  // namespace

std::vector<long> TrajectoryDataset::frameIndices() const {
  std::vector<long> out;
  out.reserve(frames.size());
  for (const auto& [f, _] : frames) out.push_back(f);
  return out;
}

const ObservationRow* TrajectoryDataset::find(long frame, int agent_id) const {
  const auto it = frames.find(frame);
  if (it == frames.end()) return nullptr;
  for (const ObservationRow& r : it->second) {
    if (r.agent_id == agent_id) return &r;
  }
  return nullptr;
}

int TrajectoryDataset::rowCount() const {
  int n = 0;
  for (const auto& [_, rows] : frames) n += static_cast<int>(rows.size());
  return n;
}

TrajectoryDataset parseHomogeneous(std::istream& in) {
  TrajectoryDataset ds;
  ds.frame_period = 0.4;
  std::string raw;
  int row_number = 0;
  long prev_frame = std::numeric_limits<long>::min();
  bool out_of_order = false;
  while (std::getline(in, raw)) {
    ++row_number;
    std::istringstream line(raw);
    double frame_d = 0.0, id_d = 0.0, x = 0.0, y = 0.0;
    if (!(line >> frame_d)) continue;  // blank line
    std::string rest;
    if (!(line >> id_d >> x >> y) || (line >> rest)) {
      rowFail(row_number, "expected 'frame_id agent_id x y'");
    }
    if (!std::isfinite(x) || !std::isfinite(y)) rowFail(row_number, "non-finite position");
    const long frame = static_cast<long>(std::llround(frame_d));
    if (frame < prev_frame) out_of_order = true;
    prev_frame = frame;
    ObservationRow row;
    row.agent_id = static_cast<int>(std::llround(id_d));
    row.type = AgentType::Pedestrian;
    row.position = Vec2(x, y);
    insertRow(ds, frame, std::move(row), row_number);
  }
  if (out_of_order) {
    std::cerr << "vopred: dataset rows were not frame-ordered; sorted by frame index\n";
  }
  return ds;
}

TrajectoryDataset parseHeterogeneous(std::istream& in) {
  TrajectoryDataset ds;
  ds.frame_period = 0.4;
  std::string raw;
  int row_number = 0;
  while (std::getline(in, raw)) {
    ++row_number;
    std::istringstream line(raw);
    std::string first;
    if (!(line >> first)) continue;
    if (first == "OBSTACLE") {
      std::vector<Vec2> vertices;
      bool closed = false;
      while (std::getline(in, raw)) {
        ++row_number;
        std::istringstream vline(raw);
        std::string tok;
        if (!(vline >> tok)) continue;
        if (tok == "END") {
          closed = true;
          break;
        }
        double x = 0.0, y = 0.0;
        std::string rest;
        std::istringstream vv(raw);
        if (!(vv >> x >> y) || (vv >> rest)) rowFail(row_number, "expected obstacle vertex 'x y'");
        vertices.emplace_back(x, y);
      }
      if (!closed) rowFail(row_number, "obstacle block missing END");
      try {
        ds.obstacles.emplace_back(std::move(vertices));
      } catch (const GeometryError& e) {
        rowFail(row_number, std::string("bad obstacle polygon: ") + e.what());
      }
      continue;
    }

    double frame_d = 0.0;
    try {
      size_t pos = 0;
      frame_d = std::stod(first, &pos);
      if (pos != first.size()) rowFail(row_number, "bad frame id '" + first + "'");
    } catch (const DatasetError&) {
      throw;
    } catch (...) {
      rowFail(row_number, "bad frame id '" + first + "'");
    }
    double id_d = 0.0, x = 0.0, y = 0.0, heading = 0.0, length = 0.0, width = 0.0;
    std::string type_name, rest;
    if (!(line >> id_d >> type_name >> x >> y >> heading >> length >> width) || (line >> rest)) {
      rowFail(row_number, "expected 'frame_id agent_id type x y heading length width'");
    }
    const std::optional<AgentType> type = parseAgentType(type_name);
    if (!type) {
      rowFail(row_number, "unknown agent type '" + type_name + "' (valid: " + validTypeList() + ")");
    }
    ObservationRow row;
    row.agent_id = static_cast<int>(std::llround(id_d));
    row.type = *type;
    row.position = Vec2(x, y);
    row.heading = heading;
    row.footprint_dims = std::make_pair(length, width);
    insertRow(ds, static_cast<long>(std::llround(frame_d)), std::move(row), row_number);
  }
  return ds;
}

void writeHeterogeneous(const TrajectoryDataset& dataset, std::ostream& out) {
  for (const ConvexPolygon& obstacle : dataset.obstacles) {
    out << "OBSTACLE\n";
    char buf[80];
    for (const Vec2& v : obstacle.vertices()) {
      std::snprintf(buf, sizeof(buf), "%.6f %.6f\n", v.x(), v.y());
      out << buf;
    }
    out << "END\n";
  }
  for (const auto& [frame, rows] : dataset.frames) {
    for (const ObservationRow& r : rows) {
      const auto [length, width] = r.footprint_dims.value_or(std::make_pair(0.0, 0.0));
      char buf[200];
      std::snprintf(buf, sizeof(buf), "%ld %d %s %.6f %.6f %.6f %.6f %.6f\n", frame, r.agent_id,
                    agentTypeName(r.type).c_str(), r.position.x(), r.position.y(),
                    r.heading.value_or(0.0), length, width);
      out << buf;
    }
  }
}

TrajectoryDataset loadHomogeneous(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset: " + path);
  return parseHomogeneous(in);
}

TrajectoryDataset loadHeterogeneous(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset: " + path);
  return parseHeterogeneous(in);
}

void saveHeterogeneous(const TrajectoryDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write dataset: " + path);
  writeHeterogeneous(dataset, out);
}

TrajectoryDataset loadDataset(const std::string& path, DatasetFormat format) {
  if (format == DatasetFormat::Homogeneous) return loadHomogeneous(path);
  if (format == DatasetFormat::Heterogeneous) return loadHeterogeneous(path);
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset: " + path);
  std::string raw;
  while (std::getline(in, raw)) {
    std::istringstream line(raw);
    std::string tok;
    int fields = 0;
    bool obstacle = false;
    while (line >> tok) {
      if (fields == 0 && tok == "OBSTACLE") obstacle = true;
      ++fields;
    }
    if (fields == 0) continue;
    if (obstacle || fields == 8) return loadHeterogeneous(path);
    if (fields == 4) return loadHomogeneous(path);
    throw DatasetError("cannot detect dataset format of " + path + " (first data row has " +
                       std::to_string(fields) + " fields; expected 4 or 8)");
  }
  throw DatasetError("dataset is empty: " + path);
}

std::pair<double, double> adeFde(const std::vector<Vec2>& predicted,
                                 const std::vector<Vec2>& truth) {
  if (predicted.size() != truth.size()) {
    throw DatasetError("prediction/truth length mismatch: " + std::to_string(predicted.size()) +
                       " vs " + std::to_string(truth.size()));
  }
  if (predicted.empty()) throw DatasetError("ade/fde needs at least one point");
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) sum += (predicted[i] - truth[i]).norm();
  return {sum / static_cast<double>(predicted.size()), (predicted.back() - truth.back()).norm()};
}

}  // namespace vopred
