#pragma once

#include "confignet/dataset.hpp"
#include "confignet/learner.hpp"

#include <cstdint>

namespace confignet {

/// constructive: only the new node's weights are fitted to the current
/// residual, earlier weights stay frozen. global: every step refits all
/// output weights by least squares.
enum class IrvflnUpdate { constructive, global };

std::string to_string(IrvflnUpdate update);
IrvflnUpdate irvfln_update_from_string(const std::string& name);

/// Incremental random vector functional-link baseline: one random node per
/// step from a fixed scope, accepted unconditionally.
struct IrvflnConfig {
  std::size_t l_max = 100;
  double epsilon = 0.05;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  IrvflnUpdate update = IrvflnUpdate::constructive;

  void validate() const;
};

TrainResult train_irvfln(const Dataset& ds, const IrvflnConfig& config);

}  // namespace confignet
