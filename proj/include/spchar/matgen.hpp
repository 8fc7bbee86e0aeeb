#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "spchar/csr.hpp"

namespace spchar {

enum class Category { Row, Column, Cyclic, Stride, Temporal, Spatial, Uniform, Exponential, Normal };

inline constexpr std::array<Category, 9> kAllCategories = {
    Category::Row,      Category::Column,  Category::Cyclic,      Category::Stride, Category::Temporal,
    Category::Spatial,  Category::Uniform, Category::Exponential, Category::Normal};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

struct GenParams {
  // Stride: 64-byte line over 4-byte elements.
  index_t stride = 16;
  // Stride: cap on nonzeros per row, 0 = fill the row.
  index_t stride_max_row_nnz = 0;
  index_t cluster_size = 10;
  index_t temporal_row_length = 10;
  std::vector<index_t> cycle{1, 2, 4, 8, 16};
  // Density scale d: Uniform on [0, 2d], Normal(d, d/2), Exponential(mean d).
  double mean_row_length = 10.0;

  bool operator==(const GenParams&) const = default;
};

struct GenSpec {
  Category category = Category::Uniform;
  index_t n = 10000;
  std::uint64_t seed = 0;
  GenParams params;
};

class GenError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Deterministic n x n matrix for the requested category; all values 1.0.
CsrMatrix generate(const GenSpec& spec);

struct GeneratedMatrix {
  std::string id;
  std::uint64_t suite_seed = 0;
  std::uint32_t replicate = 0;
  GenSpec spec;
  CsrMatrix matrix;
};

/// Sub-seed of (category, replicate) under a suite seed.
std::uint64_t suite_subseed(std::uint64_t suite_seed, Category c, std::uint32_t replicate);

/// `replicates` matrices per category with derived sub-seeds.
std::vector<GeneratedMatrix> generate_suite(index_t n, std::uint64_t seed, std::uint32_t replicates,
                                            const GenParams& params = {},
                                            const std::vector<Category>& categories = {kAllCategories.begin(),
                                                                                       kAllCategories.end()});

/// Sidecar metadata: category, n, seeds, parameters, generator id, digest.
nlohmann::json generation_metadata(const GeneratedMatrix& g);

}  // namespace spchar
