#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "spchar/csr.hpp"

namespace spchar {

class MatrixMarketError : public std::runtime_error {
public:
  MatrixMarketError(std::size_t line, const std::string& detail, const std::string& source = {});
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

private:
  std::size_t line_;
  std::string detail_;
};

/// Reads coordinate-format Matrix Market (real, integer or pattern field;
/// general or symmetric) into canonical CSR. Symmetric off-diagonal entries
/// are mirrored, duplicates summed, pattern entries valued 1.0.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market_file(const std::filesystem::path& path);

/// Writes coordinate/real/general with 1-based indices. Values use the
/// shortest decimal that round-trips the single-precision value.
/// `comment`, when non-empty, is emitted as a '%' line after the banner.
void write_matrix_market(const CsrMatrix& m, std::ostream& out, const std::string& comment = {});
void write_matrix_market_file(const CsrMatrix& m, const std::filesystem::path& path,
                              const std::string& comment = {});

}  // namespace spchar
