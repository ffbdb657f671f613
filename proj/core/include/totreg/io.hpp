#pragma once

#include "totreg/regression.hpp"
#include "totreg/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace totreg {

/// Flat-text tensor format: one header line with the space-separated shape,
/// then one value per line with 17 significant digits.
void write_tensor(std::ostream& os, const DenseTensor& t);
DenseTensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor load_tensor(const std::filesystem::path& path);

/// Instance export: a directory with a key=value metadata file, the design
/// matrix, the observations, and (when present) the ground truth.
void save_instance(const std::filesystem::path& dir, const ProblemInstance& inst);
ProblemInstance load_instance(const std::filesystem::path& dir);

std::string design_kind_name(DesignKind kind);
DesignKind design_kind_from_name(const std::string& name);

} // namespace totreg
