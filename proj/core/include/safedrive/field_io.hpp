#pragma once

#include <iosfwd>
#include <string>

#include "safedrive/risk_field.hpp"

namespace safedrive {

// CSV export: header "x,y,value", one row per cell center, row-major.
void write_field_csv(const ScalarField& field, std::ostream& out);
void write_field_csv(const ScalarField& field, const std::string& path);

// 16-bit binary portable graymap (P5, maxval 65535, big-endian samples),
// top raster row = highest y. Values are min-max normalized; the bounds
// and grid geometry go to a JSON sidecar at path + ".json".
void write_field_pgm16(const ScalarField& field, const std::string& path);

}  // namespace safedrive
