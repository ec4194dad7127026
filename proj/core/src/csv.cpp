// Copyright (c) 2026 The pivoplan Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pivoplan/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pivoplan
{

std::string format_fixed(double value, int decimals)
{
  if (std::isnan(value)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  // Avoid "-0.000" so sign noise never changes the bytes.
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
    s.erase(0, 1);
  }
  return s;
}

CsvTable::CsvTable(std::vector<std::string> header)
: header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells)
{
  if (cells.size() != header_.size()) {
    throw std::invalid_argument("CsvTable: row width does not match header");
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::add_numeric_row(std::initializer_list<double> values, int decimals)
{
  std::vector<std::string> cells;
  for (double v : values) {
    cells.push_back(format_fixed(v, decimals));
  }
  add_row(std::move(cells));
}

std::string CsvTable::str() const
{
  std::ostringstream out;
  auto line = [&out](const std::vector<std::string> & cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        out << (i ? "," : "") << cells[i];
      }
      out << '\n';
    };
  line(header_);
  for (const auto & r : rows_) {
    line(r);
  }
  return out.str();
}

void CsvTable::write(const std::filesystem::path & path) const
{
  write_text_file(path, str());
}

void write_text_file(const std::filesystem::path & path, const std::string & text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << text;
}

}  // namespace pivoplan
