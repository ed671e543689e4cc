#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "majkit/majorizers.hpp"
#include "majkit/operators.hpp"

namespace majkit::io {

namespace fs = std::filesystem;

// Matrix Market, dense ("array") and sparse ("coordinate"), real and complex,
// general or symmetric/hermitian.
void write_matrix_market(const fs::path& path, const CMat& M);
void write_matrix_market(const fs::path& path, const RMat& M);
CMat read_matrix_market(const fs::path& path);

/// Vectors as single-column Matrix Market files.
void write_vector_mm(const fs::path& path, const RVec& v);
void write_vector_mm(const fs::path& path, const CVec& v);
RVec read_real_vector(const fs::path& path);   ///< MM or CSV
CVec read_complex_vector(const fs::path& path); ///< MM or CSV with columns re,im

/// CSV with header "re,im", one row per entry.
void write_vector_csv(const fs::path& path, const CVec& v);

/// Image or sinogram as single-column CSV, row-major, preceded by a
/// "rows,cols" dimension line.
void write_image_csv(const fs::path& path, const RVec& data, Index rows, Index cols);
RVec read_image_csv(const fs::path& path, Index* rows_out = nullptr,
                    Index* cols_out = nullptr);

/// Plain-text key=value config / sidecar files. Lines starting with '#' are
/// comments; keys keep file order on write via std::map.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(const fs::path& path, const KeyValues& kv);
KeyValues read_key_values(const fs::path& path);

/// MajorizerSpec sidecar: d as a Matrix Market vector next to a key-value
/// file carrying the K descriptor, alpha and the certification tag.
void write_majorizer(const fs::path& sidecar_path, const MajorizerSpec& M,
                     const std::string& k_descriptor);
MajorizerSpec read_majorizer(const fs::path& sidecar_path);

/// Parse a K descriptor string: "identity", "dft", "dft2:<n>",
/// "stacked:dft+identity", "stacked:projector@<geom.cfg>+identity",
/// "circulant@<file>". The dimension n is the column count of the result.
OpPtr parse_k_descriptor(const std::string& descriptor, Index n);

}  // namespace majkit::io
