// SPDX-License-Identifier: Apache-2.0
/**
 * @file   serialize.hpp
 * @brief  Trained model files.
 *
 * Container magic "NILMMODL", version 1. The header carries the model
 * configuration as `config.<key>=<value>` lines, the appliance name, its
 * on-power threshold and the normalisation statistics; parameters follow as
 * 32-bit blobs in parameters() order.
 */
#pragma once

#include <nilm/data/dataset.hpp>
#include <nilm/model/model.hpp>

#include <memory>
#include <string>

namespace nilm {

struct TrainedModel {
  ModelConfig config;
  ChannelStats stats;
  std::string appliance;
  double on_threshold = 0.0;
  std::unique_ptr<Model<float>> model;
};

std::string encode_model(const TrainedModel &trained);
TrainedModel decode_model(const std::string &bytes);
void save_model(const std::string &path, const TrainedModel &trained);
TrainedModel load_model(const std::string &path);

} // namespace nilm
