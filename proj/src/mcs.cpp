#include "pvqa/mcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pvqa/error.hpp"
#include "pvqa/parallel.hpp"

namespace pvqa {

namespace {

template <typename T>
double cosine_impl(std::span<const T> p, std::span<const T> q) {
  require(p.size() == q.size(), Errc::shape_mismatch,
          "cosine similarity of vectors with lengths " + std::to_string(p.size()) + " and " +
              std::to_string(q.size()));
  require(!p.empty(), Errc::invalid_argument, "cosine similarity of empty vectors");
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i];
    const double b = q[i];
    dot += a * b;
    pp += a * a;
    qq += b * b;
  }
  if (pp == 0.0 || qq == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(pp) * std::sqrt(qq)), -1.0, 1.0);
}

double norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

void check_pair(const FeatureMap& context, const FeatureMap& predicted) {
  require(context.same_shape(predicted), Errc::shape_mismatch,
          "context and predicted feature maps differ in shape");
}

}  // namespace

double cosine_similarity(std::span<const double> p, std::span<const double> q) {
  return cosine_impl(p, q);
}

double cosine_similarity(std::span<const float> p, std::span<const float> q) {
  return cosine_impl(p, q);
}

MotionField motion_compensate(const FeatureMap& context, const FeatureMap& predicted,
                              std::optional<int> window) {
  check_pair(context, predicted);
  if (window) require(*window >= 0, Errc::invalid_argument, "search window must be >= 0");
  const int h = context.h();
  const int w = context.w();
  const std::size_t cells = context.cells();
  const std::size_t k = static_cast<std::size_t>(context.k());

  std::vector<double> predicted_norm(cells);
  for (std::size_t c = 0; c < cells; ++c) predicted_norm[c] = norm(predicted.cell(c));

  MotionField field{h, w, std::vector<int>(cells), std::vector<double>(cells)};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t src = static_cast<std::size_t>(i) * w + j;
      const auto p = context.cell(src);
      const double p_norm = norm(p);
      int i0 = 0, i1 = h - 1, j0 = 0, j1 = w - 1;
      if (window) {
        i0 = std::max(0, i - *window);
        i1 = std::min(h - 1, i + *window);
        j0 = std::max(0, j - *window);
        j1 = std::min(w - 1, j + *window);
      }
      double best = -std::numeric_limits<double>::infinity();
      int best_cell = i0 * w + j0;
      for (int ii = i0; ii <= i1; ++ii) {
        for (int jj = j0; jj <= j1; ++jj) {
          const std::size_t dst = static_cast<std::size_t>(ii) * w + jj;
          double s = 0.0;
          if (p_norm != 0.0 && predicted_norm[dst] != 0.0) {
            const auto q = predicted.cell(dst);
            double dot = 0.0;
            for (std::size_t c = 0; c < k; ++c) dot += static_cast<double>(p[c]) * q[c];
            s = std::clamp(dot / (p_norm * predicted_norm[dst]), -1.0, 1.0);
          }
          if (s > best) {
            best = s;
            best_cell = static_cast<int>(dst);
          }
        }
      }
      field.match[src] = best_cell;
      field.similarity[src] = best;
    }
  }
  return field;
}

FeatureMap compensated_map(const FeatureMap& predicted, const MotionField& field) {
  require(field.h == predicted.h() && field.w == predicted.w(), Errc::shape_mismatch,
          "motion field does not match the predicted map");
  FeatureMap out(predicted.h(), predicted.w(), predicted.k());
  for (std::size_t c = 0; c < predicted.cells(); ++c) {
    const auto src = predicted.cell(static_cast<std::size_t>(field.match[c]));
    std::copy(src.begin(), src.end(), out.cell(c).begin());
  }
  return out;
}

std::vector<double> mcs_frame_features(const FeatureMap& context, const FeatureMap& predicted,
                                       std::optional<int> window) {
  check_pair(context, predicted);
  const MotionField field = motion_compensate(context, predicted, window);
  const std::size_t k = static_cast<std::size_t>(context.k());
  std::vector<double> dot(k, 0.0), aa(k, 0.0), bb(k, 0.0);
  for (std::size_t cell = 0; cell < context.cells(); ++cell) {
    const auto a = context.cell(cell);
    const auto b = predicted.cell(static_cast<std::size_t>(field.match[cell]));
    for (std::size_t c = 0; c < k; ++c) {
      const double x = a[c];
      const double y = b[c];
      dot[c] += x * y;
      aa[c] += x * x;
      bb[c] += y * y;
    }
  }
  std::vector<double> out(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (aa[c] == 0.0 || bb[c] == 0.0) continue;
    out[c] = std::clamp(dot[c] / (std::sqrt(aa[c]) * std::sqrt(bb[c])), -1.0, 1.0);
  }
  return out;
}

std::vector<double> mcs_video_features(std::span<const FeatureMap> maps, int n_context,
                                       std::optional<int> window, int jobs) {
  require(n_context >= 1, Errc::invalid_argument, "n_context must be >= 1");
  require(maps.size() > static_cast<std::size_t>(n_context), Errc::insufficient_data,
          "MCS needs more frames (" + std::to_string(maps.size()) + ") than context frames (" +
              std::to_string(n_context) + ")");
  for (const auto& m : maps)
    require(m.same_shape(maps.front()), Errc::shape_mismatch,
            "feature maps of a video must share one shape");
  const FeatureMap& reference = maps[static_cast<std::size_t>(n_context) - 1];
  const std::size_t n_predicted = maps.size() - static_cast<std::size_t>(n_context);
  const std::size_t k = static_cast<std::size_t>(reference.k());
  std::vector<double> out(k * n_predicted);
  parallel_for(n_predicted, jobs, [&](std::size_t p) {
    const auto f = mcs_frame_features(reference, maps[n_context + p], window);
    std::copy(f.begin(), f.end(), out.begin() + static_cast<std::ptrdiff_t>(p * k));
  });
  return out;
}

}  // namespace pvqa
