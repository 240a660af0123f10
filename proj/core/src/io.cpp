#include "aquarender/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <vector>

#include "aquarender/error.hpp"

namespace aquarender::io {
namespace fs = std::filesystem;
namespace {

void require_png(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (ext != ".png") {
    throw DataError("unsupported image format '" + ext + "' for " + path.string() +
                    " (only .png is supported)");
  }
}

cv::Mat decode(const fs::path& path) {
  require_png(path);
  const std::string bytes = read_file(path);
  const std::vector<uchar> buf(bytes.begin(), bytes.end());
  cv::Mat mat = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("cannot decode image " + path.string());
  if (mat.rows < 1 || mat.cols < 1) throw DataError("image has zero size: " + path.string());
  return mat;
}

void encode(const cv::Mat& mat, const fs::path& path) {
  require_png(path);
  std::vector<uchar> buf;
  if (!cv::imencode(".png", mat, buf, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw DataError("cannot encode image " + path.string());
  }
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size()));
}

int interpolation_for(int from_w, int from_h, int to_w, int to_h) {
  return (to_w <= from_w && to_h <= from_h) ? cv::INTER_AREA : cv::INTER_CUBIC;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

LinearImage load_image(const fs::path& path) {
  cv::Mat mat = decode(path);
  if (mat.depth() != CV_8U) throw DataError("color image must be 8-bit: " + path.string());
  cv::Mat rgb;
  switch (mat.channels()) {
    case 1: cv::cvtColor(mat, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(mat, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(mat, rgb, cv::COLOR_BGRA2RGB); break;
    default: throw DataError("unsupported channel count in " + path.string());
  }
  LinearImage img(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<cv::Vec3b>(y);
    for (int x = 0; x < rgb.cols; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[x][c] / 255.0;
    }
  }
  return img;
}

void save_image(const LinearImage& img, const fs::path& path) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::round(clamp_unit(img.at(x, y, c)) * 255.0);
        row[x][2 - c] = static_cast<uchar>(v);
      }
    }
  }
  encode(bgr, path);
}

DepthMap load_depth(const fs::path& path, double scale) {
  if (!(scale > 0.0)) throw InvalidParameterError("depth scale must be > 0");
  cv::Mat mat = decode(path);
  if (mat.channels() != 1 || (mat.depth() != CV_16U && mat.depth() != CV_8U)) {
    throw DataError("depth image must be single-channel 16-bit: " + path.string());
  }
  cv::Mat wide;
  mat.convertTo(wide, CV_64F);
  DepthMap depth(wide.cols, wide.rows);
  for (int y = 0; y < wide.rows; ++y) {
    const auto* row = wide.ptr<double>(y);
    for (int x = 0; x < wide.cols; ++x) depth.at(x, y) = row[x] * scale;
  }
  return depth;
}

void save_depth(const DepthMap& depth, const fs::path& path, double scale) {
  if (!(scale > 0.0)) throw InvalidParameterError("depth scale must be > 0");
  cv::Mat mat(depth.height(), depth.width(), CV_16UC1);
  for (int y = 0; y < depth.height(); ++y) {
    auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < depth.width(); ++x) {
      const double v = std::round(depth.at(x, y) / scale);
      row[x] = static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0));
    }
  }
  encode(mat, path);
}

LinearImage resample(const LinearImage& img, int width, int height) {
  if (img.width() == width && img.height() == height) return img;
  cv::Mat src(img.height(), img.width(), CV_64FC3, const_cast<double*>(img.values().data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(width, height), 0, 0,
             interpolation_for(img.width(), img.height(), width, height));
  LinearImage out(width, height);
  const double* d = dst.ptr<double>(0);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = clamp_unit(d[i]);
  return out;
}

DepthMap resample_depth(const DepthMap& depth, int width, int height) {
  if (depth.width() == width && depth.height() == height) return depth;
  cv::Mat values(depth.height(), depth.width(), CV_64FC1);
  cv::Mat valid(depth.height(), depth.width(), CV_64FC1);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      values.at<double>(y, x) = depth.at(x, y);
      valid.at<double>(y, x) = depth.at(x, y) > 0.0 ? 1.0 : 0.0;
    }
  }
  const int interp = interpolation_for(depth.width(), depth.height(), width, height);
  cv::Mat v2;
  cv::Mat w2;
  cv::resize(values, v2, cv::Size(width, height), 0, 0, interp);
  cv::resize(valid, w2, cv::Size(width, height), 0, 0, interp);
  DepthMap out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double w = w2.at<double>(y, x);
      out.at(x, y) = w > 1e-9 ? std::max(v2.at<double>(y, x) / w, 0.0) : 0.0;
    }
  }
  return out;
}

}  // namespace aquarender::io
