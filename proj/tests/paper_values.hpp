#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Printed simulation-table values the acceptance suite reproduces.
namespace paper {

struct CrossCell {
  std::int64_t m;
  double eta;      // 1 = SRS block
  int k;
  double en;       // E(n)
  double cv;       // CV of the ACS estimator
  double re;       // variance ratio vs the same initial design
};

struct BaselineCell {
  std::int64_t m;
  double eta;
  double cv;
};

// Table 1: person population, N = 1e5, theta = 1e3.
inline const std::vector<BaselineCell> kTable1Baselines{
    {1000, 1, 0.31}, {1630, 1, 0.24}, {2420, 1, 0.20}, {5000, 1, 0.14}, {10000, 1, 0.09},
    {1000, 2, 0.22}, {5000, 2, 0.09}, {10000, 2, 0.06},
};

inline const std::vector<CrossCell> kTable1{
    {1000, 1, 100, 1631, 0.24, 0.58},  {1000, 1, 10, 1085, 0.31, 0.96},  {1000, 1, 2, 1010, 0.31, 0.99},
    {1630, 1, 100, 2423, 0.15, 0.40},  {1630, 1, 10, 1766, 0.24, 0.93},  {1630, 1, 2, 1646, 0.24, 0.99},
    {2420, 1, 100, 3306, 0.10, 0.23},  {2420, 1, 10, 2614, 0.19, 0.89},  {2420, 1, 2, 2443, 0.20, 0.99},
    {5000, 1, 100, 5944, 0.02, 0.03},  {5000, 1, 10, 5352, 0.12, 0.79},  {5000, 1, 2, 5048, 0.14, 0.97},
    {10000, 1, 100, 10900, 0.00, 0.00}, {10000, 1, 10, 10551, 0.07, 0.59}, {10000, 1, 2, 10090, 0.09, 0.95},
    {1000, 2, 100, 1840, 0.13, 0.32},  {1000, 2, 10, 1160, 0.21, 0.91},  {1000, 2, 2, 1020, 0.22, 0.99},
    {5000, 2, 100, 5901, 0.00, 0.00},  {5000, 2, 10, 5549, 0.07, 0.60},  {5000, 2, 2, 5090, 0.09, 0.95},
    {10000, 2, 100, 10802, 0.00, 0.00}, {10000, 2, 10, 10692, 0.04, 0.31}, {10000, 2, 2, 10159, 0.06, 0.89},
};

// Table 2: household population, same frame sizes.
inline const std::vector<BaselineCell> kTable2Baselines{
    {1000, 1, 0.35}, {5000, 1, 0.16}, {10000, 1, 0.11},
    {1000, 2, 0.25}, {5000, 2, 0.11}, {10000, 2, 0.07},
};

inline const std::vector<CrossCell> kTable2{
    {1000, 1, 100, 1628, 0.24, 0.45},  {1000, 1, 10, 1086, 0.31, 0.77},  {1000, 1, 2, 1010, 0.34, 0.89},
    {5000, 1, 100, 5944, 0.02, 0.03},  {5000, 1, 10, 5351, 0.13, 0.63},  {5000, 1, 2, 5048, 0.14, 0.87},
    {10000, 1, 100, 10900, 0.00, 0.00}, {10000, 1, 10, 10552, 0.07, 0.49}, {10000, 1, 2, 10090, 0.10, 0.84},
    {1000, 2, 100, 1844, 0.13, 0.26},  {1000, 2, 10, 1162, 0.22, 0.71},  {1000, 2, 2, 1019, 0.23, 0.86},
    {5000, 2, 100, 5901, 0.00, 0.00},  {5000, 2, 10, 5547, 0.08, 0.47},  {5000, 2, 2, 5089, 0.10, 0.85},
    {10000, 2, 100, 10802, 0.00, 0.00}, {10000, 2, 10, 10691, 0.04, 0.25}, {10000, 2, 2, 10159, 0.06, 0.80},
};

// Table 4: SE(panel) in units of 1e-2, REs of pACS / iACS vs the panel.
struct ChangeBlock {
  const char* name;
  std::map<std::string, double> se_panel;  // x 1e-2
  std::map<std::string, double> re_pacs;
  std::map<std::string, double> re_iacs;
};

inline const std::vector<ChangeBlock> kTable4{
    {"srs-m1000",
     {{"L1", 0.20}, {"L2", 0.20}, {"L3", 0.14}, {"M1", 0.28}, {"M2", 0.28}, {"M3", 0.14},
      {"S1", 0.28}, {"S2", 0.28}, {"S3", 0.13}},
     {{"L1", 0.71}, {"L2", 0.73}, {"L3", 0.90}, {"M1", 0.89}, {"M2", 0.89}, {"M3", 0.98},
      {"S1", 0.89}, {"S2", 0.91}, {"S3", 0.98}},
     {{"L1", 0.57}, {"L2", 0.60}, {"L3", 0.52}, {"M1", 0.69}, {"M2", 0.70}, {"M3", 0.52},
      {"S1", 0.84}, {"S2", 0.85}, {"S3", 0.75}}},
    {"srs-m5000",
     {{"L1", 0.09}, {"L2", 0.09}, {"L3", 0.06}, {"M1", 0.12}, {"M2", 0.12}, {"M3", 0.06},
      {"S1", 0.12}, {"S2", 0.12}, {"S3", 0.06}},
     {{"L1", 0.09}, {"L2", 0.11}, {"L3", 0.38}, {"M1", 0.62}, {"M2", 0.63}, {"M3", 0.87},
      {"S1", 0.65}, {"S2", 0.64}, {"S3", 0.91}},
     {{"L1", 0.49}, {"L2", 0.51}, {"L3", 0.49}, {"M1", 0.67}, {"M2", 0.67}, {"M3", 0.53},
      {"S1", 0.85}, {"S2", 0.84}, {"S3", 0.76}}},
    {"eta2-m1000",
     {{"L1", 0.17}, {"L2", 0.17}, {"L3", 0.12}, {"M1", 0.24}, {"M2", 0.24}, {"M3", 0.12},
      {"S1", 0.24}, {"S2", 0.24}, {"S3", 0.12}},
     {{"L1", 0.31}, {"L2", 0.33}, {"L3", 0.41}, {"M1", 0.51}, {"M2", 0.51}, {"M3", 0.50},
      {"S1", 0.52}, {"S2", 0.53}, {"S3", 0.51}},
     {{"L1", 0.70}, {"L2", 0.69}, {"L3", 0.68}, {"M1", 0.79}, {"M2", 0.81}, {"M3", 0.68},
      {"S1", 0.89}, {"S2", 0.90}, {"S3", 0.84}}},
};

}  // namespace paper
