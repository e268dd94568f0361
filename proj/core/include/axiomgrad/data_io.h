#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/dataset.h"
#include "axiomgrad/network.h"
#include "axiomgrad/neuron_attr.h"
#include "axiomgrad/tensor.h"

namespace axiomgrad {

inline constexpr const char* kModelFormat = "axiomgrad-model/1";

// ---- IDX

// Reads an IDX image file (magic 0x00000803, [count, rows, cols]) and its
// label file (magic 0x00000801). Pixels are scaled by 1/255 into [rows, cols]
// tensors. Throws FormatError on bad magic, truncation, trailing bytes or
// mismatched counts, IoError when a file cannot be read.
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path,
                        SplitTag split = SplitTag::kTrain);
std::vector<Tensor> load_idx_images(const std::string& images_path);

// Writes pixels rounded to bytes (values clamped to [0, 1]).
void save_idx(const LabeledDataset& data, const std::string& images_path,
              const std::string& labels_path);

// ---- models

void save_model(const Network& net, const std::string& path);
// Throws FormatError on a wrong "format" string or inconsistent shapes.
Network load_model(const std::string& path);
nlohmann::json model_to_json(const Network& net);
Network model_from_json(const nlohmann::json& j);

// ---- overlays

struct OverlayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  std::string to_ppm() const;  // binary P6, max value 255
};

// Grayscale `image` in [0, 1] tinted green where the attribution is positive
// and red where negative, with opacity min(1, |v| / q) for q the 99th
// percentile of |v| (the maximum when that is zero). `box` is outlined in
// yellow. Both tensors must have the same element count; the last two
// dimensions of `image` give its height and width.
OverlayImage render_overlay(const Tensor& image, const Tensor& attribution,
                            const std::optional<PixelBox>& box = std::nullopt,
                            std::size_t scale = 1);

// ---- text outputs

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// "index,value" rows for an input attribution.
std::string attribution_csv(const Tensor& values);
// "neuron_index,value" rows for a neuron attribution.
std::string neuron_csv(const Tensor& values);

}  // namespace axiomgrad
