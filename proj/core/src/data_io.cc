#include "axiomgrad/data_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "axiomgrad/error.h"

namespace axiomgrad {

using nlohmann::json;

// ---- LabeledDataset

void LabeledDataset::validate() const {
  if (images.size() != labels.size()) {
    throw ValueError("dataset has " + std::to_string(images.size()) +
                     " images but " + std::to_string(labels.size()) + " labels");
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw ValueError("label " + std::to_string(label) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.split = split;
  out.num_classes = num_classes;
  out.images.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.images.push_back(images.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

LabeledDataset LabeledDataset::first(std::size_t n) const {
  std::vector<std::size_t> idx(std::min(n, size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return subset(idx);
}

LabeledDataset LabeledDataset::with_label(int label) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (labels[i] == label) idx.push_back(i);
  }
  return subset(idx);
}

// ---- files

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return data;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

// ---- IDX

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(const std::string& data, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    v = (v << 8) | static_cast<std::uint8_t>(data[offset + k]);
  }
  return v;
}

void append_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xff));
  }
}

struct IdxFile {
  std::vector<std::uint32_t> dims;
  std::size_t payload_offset = 0;
};

IdxFile parse_header(const std::string& data, std::uint32_t magic,
                     std::size_t rank, const std::string& path) {
  if (data.size() < 4 + 4 * rank) throw FormatError("'" + path + "' is truncated");
  const std::uint32_t found = read_be32(data, 0);
  if (found != magic) {
    std::ostringstream msg;
    msg << "'" << path << "' has magic 0x" << std::hex << found << ", expected 0x"
        << magic;
    throw FormatError(msg.str());
  }
  IdxFile f;
  std::size_t expected = 1;
  for (std::size_t k = 0; k < rank; ++k) {
    f.dims.push_back(read_be32(data, 4 + 4 * k));
    expected *= f.dims.back();
  }
  f.payload_offset = 4 + 4 * rank;
  if (data.size() - f.payload_offset != expected) {
    throw FormatError("'" + path + "' declares " + std::to_string(expected) +
                      " elements but holds " +
                      std::to_string(data.size() - f.payload_offset) + " bytes");
  }
  return f;
}

}  // namespace

std::vector<Tensor> load_idx_images(const std::string& images_path) {
  const std::string data = read_file(images_path);
  const IdxFile f = parse_header(data, kImageMagic, 3, images_path);
  const std::size_t rows = f.dims[1];
  const std::size_t cols = f.dims[2];
  std::vector<Tensor> images;
  images.reserve(f.dims[0]);
  std::size_t pos = f.payload_offset;
  for (std::size_t n = 0; n < f.dims[0]; ++n) {
    Tensor img({rows, cols});
    for (double& v : img.data()) {
      v = static_cast<std::uint8_t>(data[pos++]) / 255.0;
    }
    images.push_back(std::move(img));
  }
  return images;
}

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path, SplitTag split) {
  LabeledDataset out;
  out.split = split;
  out.images = load_idx_images(images_path);
  const std::string data = read_file(labels_path);
  const IdxFile f = parse_header(data, kLabelMagic, 1, labels_path);
  if (f.dims[0] != out.images.size()) {
    throw FormatError("'" + images_path + "' holds " +
                      std::to_string(out.images.size()) + " images but '" +
                      labels_path + "' holds " + std::to_string(f.dims[0]) +
                      " labels");
  }
  out.labels.reserve(f.dims[0]);
  for (std::size_t n = 0; n < f.dims[0]; ++n) {
    out.labels.push_back(static_cast<std::uint8_t>(data[f.payload_offset + n]));
  }
  try {
    out.validate();
  } catch (const ValueError& e) {
    throw FormatError("'" + labels_path + "': " + e.what());
  }
  return out;
}

void save_idx(const LabeledDataset& data, const std::string& images_path,
              const std::string& labels_path) {
  data.validate();
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!data.empty()) {
    const Shape& s = data.images.front().shape();
    if (s.size() < 2) throw ShapeError("IDX images need at least two dimensions");
    rows = s[s.size() - 2];
    cols = s.back();
  }
  std::string img;
  append_be32(img, kImageMagic);
  append_be32(img, static_cast<std::uint32_t>(data.size()));
  append_be32(img, static_cast<std::uint32_t>(rows));
  append_be32(img, static_cast<std::uint32_t>(cols));
  for (const Tensor& t : data.images) {
    if (t.size() != rows * cols) throw ShapeError("IDX images differ in size");
    for (double v : t.data()) {
      img.push_back(static_cast<char>(
          static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
  }
  std::string lab;
  append_be32(lab, kLabelMagic);
  append_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (int l : data.labels) lab.push_back(static_cast<char>(l));
  write_file(images_path, img);
  write_file(labels_path, lab);
}

// ---- models

json model_to_json(const Network& net) {
  json j = net.to_json();
  j["format"] = kModelFormat;
  return j;
}

Network model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("format")) {
    throw FormatError("model file has no \"format\" field");
  }
  const json& format = j.at("format");
  if (!format.is_string() || format.get<std::string>() != kModelFormat) {
    throw FormatError("unsupported model format " + format.dump() +
                      ", expected \"" + kModelFormat + "\"");
  }
  try {
    return Network::from_json(j);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("inconsistent model: ") + e.what());
  } catch (const ValueError& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
}

void save_model(const Network& net, const std::string& path) {
  write_file(path, model_to_json(net).dump() + "\n");
}

Network load_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

// ---- overlays

std::string OverlayImage::to_ppm() const {
  std::string out = "P6\n" + std::to_string(width) + " " +
                    std::to_string(height) + "\n255\n";
  out.append(rgb.begin(), rgb.end());
  return out;
}

OverlayImage render_overlay(const Tensor& image, const Tensor& attribution,
                            const std::optional<PixelBox>& box,
                            std::size_t scale) {
  if (image.shape().size() < 2) {
    throw ShapeError("overlay image needs at least two dimensions");
  }
  if (image.size() != attribution.size()) {
    throw ShapeError("attribution has " + std::to_string(attribution.size()) +
                     " entries, image has " + std::to_string(image.size()));
  }
  if (scale < 1) throw ValueError("overlay scale must be at least 1");
  const std::size_t h = image.shape()[image.shape().size() - 2];
  const std::size_t w = image.shape().back();
  if (h * w != image.size()) {
    throw ShapeError("overlay needs a single-channel image, got " +
                     shape_to_string(image.shape()));
  }
  if (box && (box->col1 >= w || box->row1 >= h || box->col0 > box->col1 ||
              box->row0 > box->row1)) {
    throw ValueError("box does not fit the image");
  }

  // Nearest-rank 99th percentile of |v|.
  std::vector<double> mags(attribution.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(attribution[i]);
  std::vector<double> sorted = mags;
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(sorted.size())));
  const std::size_t pick = rank == 0 ? 0 : rank - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(pick),
                   sorted.end());
  double q = sorted[pick];
  if (q == 0.0) q = *std::max_element(mags.begin(), mags.end());

  std::vector<std::uint8_t> small(h * w * 3);
  for (std::size_t i = 0; i < h * w; ++i) {
    const double base = std::clamp(image[i], 0.0, 1.0) * 255.0;
    double rgb[3] = {base, base, base};
    const double v = attribution[i];
    if (v != 0.0 && q > 0.0) {
      const double alpha = std::min(1.0, mags[i] / q);
      const double tint[3] = {v < 0 ? 255.0 : 0.0, v > 0 ? 255.0 : 0.0, 0.0};
      for (int c = 0; c < 3; ++c) rgb[c] = (1.0 - alpha) * rgb[c] + alpha * tint[c];
    }
    for (int c = 0; c < 3; ++c) {
      small[i * 3 + c] = static_cast<std::uint8_t>(std::lround(rgb[c]));
    }
  }
  if (box) {
    for (std::size_t r = box->row0; r <= box->row1; ++r) {
      for (std::size_t c = box->col0; c <= box->col1; ++c) {
        const bool edge = r == box->row0 || r == box->row1 || c == box->col0 ||
                          c == box->col1;
        if (!edge) continue;
        std::uint8_t* px = &small[(r * w + c) * 3];
        px[0] = 255;
        px[1] = 255;
        px[2] = 0;
      }
    }
  }

  OverlayImage out;
  out.width = w * scale;
  out.height = h * scale;
  out.rgb.resize(out.width * out.height * 3);
  for (std::size_t r = 0; r < out.height; ++r) {
    for (std::size_t c = 0; c < out.width; ++c) {
      const std::uint8_t* src = &small[((r / scale) * w + c / scale) * 3];
      std::copy(src, src + 3, &out.rgb[(r * out.width + c) * 3]);
    }
  }
  return out;
}

// ---- CSV

namespace {

std::string indexed_csv(const char* header, const Tensor& values) {
  std::string out = std::string(header) + "\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_number(values[i]);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string attribution_csv(const Tensor& values) {
  return indexed_csv("index,value", values);
}

std::string neuron_csv(const Tensor& values) {
  return indexed_csv("neuron_index,value", values);
}

}  // namespace axiomgrad
