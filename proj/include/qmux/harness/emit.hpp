#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmux::harness {

struct EmitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ReportBundle {
  std::string command;
  nlohmann::json structured;  // self-describing document (may carry timing)
  std::vector<Table> tables;  // byte-stable given config + seed
  bool failed = false;        // set by commands that assert (validate)
};

// 12 significant digits, fixed column order, one header row.
inline std::string render_table_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  char buffer[40];
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw EmitError("table '" + table.name + "' has a ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buffer, sizeof(buffer), "%.12g", row[i]);
      out += buffer;
    }
    out += '\n';
  }
  return out;
}

// Writes <command>.json plus one <command>_<table>.csv per table and returns
// the paths written.
inline std::vector<std::string> emit(const ReportBundle& bundle,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw EmitError("cannot create output directory " + out_dir + ": " + ec.message());

  std::vector<std::string> written;
  const fs::path base(out_dir);

  const fs::path json_path = base / (bundle.command + ".json");
  {
    std::ofstream out(json_path);
    if (!out) throw EmitError("cannot write " + json_path.string());
    out << bundle.structured.dump(2) << '\n';
    if (!out) throw EmitError("write failed: " + json_path.string());
  }
  written.push_back(json_path.string());

  for (const auto& table : bundle.tables) {
    const fs::path csv_path = base / (bundle.command + "_" + table.name + ".csv");
    std::ofstream out(csv_path);
    if (!out) throw EmitError("cannot write " + csv_path.string());
    out << render_table_csv(table);
    if (!out) throw EmitError("write failed: " + csv_path.string());
    written.push_back(csv_path.string());
  }
  return written;
}

}  // namespace qmux::harness
