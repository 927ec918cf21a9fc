#pragma once

#include "twolip/dataset.hpp"
#include "twolip/network.hpp"
#include "twolip/tensor.hpp"

#include <iosfwd>
#include <string>

namespace twolip {

/// Versioned binary containers, little-endian doubles throughout. The
/// dataset header also records the generator identity string, since the
/// bytes are meaningful only relative to the stream that produced them.
void save_dataset(const GenericDataset& ds, const std::string& path);
GenericDataset load_dataset(const std::string& path);
std::string dataset_to_bytes(const GenericDataset& ds);
GenericDataset dataset_from_bytes(const std::string& bytes);

void save_network(const TwoLayerNet& net, const std::string& path);
TwoLayerNet load_network(const std::string& path);
std::string network_to_bytes(const TwoLayerNet& net);
TwoLayerNet network_from_bytes(const std::string& bytes);

void save_tensor(const RankOneSum& t, const std::string& path);
RankOneSum load_tensor(const std::string& path);
std::string tensor_to_bytes(const RankOneSum& t);
RankOneSum tensor_from_bytes(const std::string& bytes);

}  // namespace twolip
