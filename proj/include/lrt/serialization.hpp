#pragma once

#include "lrt/classifier.hpp"
#include "lrt/dataset.hpp"
#include "lrt/transform_learning.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace lrt {

/// Binary container family, all little-endian:
///   "LRT1"  transform: u32 d, u8 kind (0 global / 1 per-class),
///           i32 class index, d*d f64 entries column-major.
///   "LRD1"  dataset cache: u32 d, u32 K, u32 classes, d*K f64 column-major,
///           K i32 labels, class-name table, u8 tagged, K condition tags.
///   "LRM1"  low-rank model: u8 protocol, u32 d, u32 classes, RPCA config,
///           embedded transform blocks, per-class dictionary blocks.
/// Strings are u32 length + bytes.

void save_transform(const Transform& t, const std::filesystem::path& file);
Transform load_transform(const std::filesystem::path& file);
void write_transform(const Transform& t, std::ostream& out);
Transform read_transform(std::istream& in);

void save_dataset(const DataMatrix& data, const std::filesystem::path& file);
DataMatrix load_dataset(const std::filesystem::path& file);

void save_model(const LowRankModel& model, const std::filesystem::path& file);
LowRankModel load_model(const std::filesystem::path& file);

/// One objective value per line, accompanying a learned transform.
void save_trace(const LearnTrace& trace, const std::filesystem::path& file);

/// Human-readable header summary of any container file (for `lrt inspect`).
std::string describe_container(const std::filesystem::path& file);

/// Writes via a temporary file in the same directory plus rename, so readers
/// never observe partial content.
void atomic_write_file(const std::filesystem::path& file,
                       const std::string& content);

}  // namespace lrt
