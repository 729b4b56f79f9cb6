#pragma once

#include "relsense/controller.hpp"
#include "relsense/plant_sim.hpp"
#include "relsense/sensing_model.hpp"
#include "relsense/spectral.hpp"
#include "relsense/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace relsense::io {

/// Coordinate-list text: header line "# rows cols nnz", then one
/// "row,col,value" line per entry, 0-based.
void write_coo(const std::filesystem::path& path, const SparseMatrix& matrix);
SparseMatrix read_coo(const std::filesystem::path& path);

/// Comma-separated table with a header line.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& rows);

nlohmann::json geometry_to_json(const SegmentGeometry& geometry);
nlohmann::json certificate_to_json(const WalshCertificate& certificate);
nlohmann::json controller_to_json(const ModalController& controller);
ModalController controller_from_json(const nlohmann::json& j);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Long-format trace CSV: "t,channel_id,value".
void write_trace_csv(const std::filesystem::path& path, const SimulationTrace& trace);

/// Columnar binary trace: magic "RSTRACE1", then little-endian f64 dt and
/// horizon, u64 seed, u32 channel count, u32 step count, length-prefixed
/// channel names, then the samples channel-major as f64.
void write_trace_binary(const std::filesystem::path& path, const SimulationTrace& trace);
SimulationTrace read_trace_binary(const std::filesystem::path& path);

}  // namespace relsense::io
