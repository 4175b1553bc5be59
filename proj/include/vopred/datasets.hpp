#pragma once

#include "vopred/geometry.hpp"
#include "vopred/kinematics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vopred {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObservationRow {
  int agent_id = 0;
  AgentType type = AgentType::Pedestrian;
  Vec2 position{0.0, 0.0};
  std::optional<double> heading;
  // Footprint length (along heading) and width, meters.
  std::optional<std::pair<double, double>> footprint_dims;
};

// Frame-indexed agent observations plus static obstacle polygons. Frame
// indices keep their source values (ETH/UCY-style files step by 10); windows
// are built over the sorted unique index sequence.
struct TrajectoryDataset {
  std::map<long, std::vector<ObservationRow>> frames;
  double frame_period = 0.4;
  std::vector<ConvexPolygon> obstacles;

  std::vector<long> frameIndices() const;
  const ObservationRow* find(long frame, int agent_id) const;
  int rowCount() const;
};

// `frame_id agent_id x y` per row, whitespace separated; every agent is a
// pedestrian observed at 0.4 s. Rows may arrive out of frame order (sorted
// with a warning); malformed rows report their row number.
TrajectoryDataset loadHomogeneous(const std::string& path);
TrajectoryDataset parseHomogeneous(std::istream& in);

// `frame_id agent_id type x y heading length width` rows plus optional
// obstacle blocks:  OBSTACLE / one `x y` vertex per line / END.
TrajectoryDataset loadHeterogeneous(const std::string& path);
TrajectoryDataset parseHeterogeneous(std::istream& in);

// The heterogeneous writer used by the simulator; fixed six-decimal
// formatting so equal datasets serialize byte-identically.
void writeHeterogeneous(const TrajectoryDataset& dataset, std::ostream& out);
void saveHeterogeneous(const TrajectoryDataset& dataset, const std::string& path);

enum class DatasetFormat { Auto, Homogeneous, Heterogeneous };
TrajectoryDataset loadDataset(const std::string& path, DatasetFormat format = DatasetFormat::Auto);

// Average and final displacement error of a prediction against ground truth.
std::pair<double, double> adeFde(const std::vector<Vec2>& predicted,
                                 const std::vector<Vec2>& truth);

}  // namespace vopred
