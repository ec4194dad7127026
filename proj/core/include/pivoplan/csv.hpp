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

#ifndef PIVOPLAN__CSV_HPP_
#define PIVOPLAN__CSV_HPP_

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace pivoplan
{

/// Fixed-precision formatting so repeated runs produce identical bytes.
std::string format_fixed(double value, int decimals);

/// Minimal row-oriented CSV builder; cells are written verbatim.
class CsvTable
{
public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_numeric_row(std::initializer_list<double> values, int decimals = 6);
  std::size_t rows() const {return rows_.size();}
  std::string str() const;
  /// Throws std::runtime_error when the file cannot be written.
  void write(const std::filesystem::path & path) const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path & path, const std::string & text);

}  // namespace pivoplan

#endif  // PIVOPLAN__CSV_HPP_
