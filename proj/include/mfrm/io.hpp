#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"

namespace mfrm {

// Long format: id,dim,t,y with dim and t starting at 1.
CurveDataset read_curves_csv(const std::string& path);
// id,<names> header, then a row whose id is "type" holding cont or cat per column.
void read_covariates_csv(const std::string& path, CurveDataset& data);
// id,label
void read_truth_csv(const std::string& path, CurveDataset& data);

void write_curves_csv(const std::string& path, const CurveDataset& data);
void write_covariates_csv(const std::string& path, const CurveDataset& data);
void write_truth_csv(const std::string& path, const CurveDataset& data);

std::string format_double(double x);
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace mfrm
