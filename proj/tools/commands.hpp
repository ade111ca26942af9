#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctfconn/config.hpp"

namespace ctfconn::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

/// Writes the recording container at out and the scene descriptor next to it (out + ".scene.json").
void cmd_gen(const RunConfig& config, const std::filesystem::path& out);

/// Recording container -> tensor container.
void cmd_tensorize(const RunConfig& config, const std::filesystem::path& recording, const std::filesystem::path& out);

/// Fits config.algo at config.rank and writes a model container; returns the report document.
Json cmd_fit(const RunConfig& config, const std::filesystem::path& tensor, const std::filesystem::path& out);

struct ConnOutputs {
  std::filesystem::path matrix_csv, regions_csv, matrix_svg, regions_svg;
};

/// Scalp map of the strongest component pair in the band (Hz), written as CSV and SVG,
/// full and grouped by region. Electrode positions are the default cap for the model's channel count.
ConnOutputs cmd_conn(const std::filesystem::path& model, Band band, const std::filesystem::path& out_prefix);

/// Runs the sweep and writes records.csv, summary.json and the plots into out_dir.
SweepResult cmd_bench(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// EV / CONN / LOC versus PR, one SVG each per (algorithm, rank); returns the files written.
std::vector<std::filesystem::path> cmd_plot(const std::filesystem::path& summary, const std::filesystem::path& out_dir);

/// "lo:hi" in Hz.
Band parse_band(const std::string& text);

/// Full command line; errors are reported on err and mapped to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ctfconn::cli
