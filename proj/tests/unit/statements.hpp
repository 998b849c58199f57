#pragma once

#include "darkscan/distribution.hpp"

namespace testing {

inline constexpr const char* kShoesStatement = "me and my friends are going to buy shoes which are 20% off";
inline constexpr const char* kHurryStatement = "Hurry! Only 2 left in stock";
inline constexpr const char* kSubscribeStatement =
    "sdjbfksbdfgbkldsglkdflgf subscribe now or regret the offer of 20% djkbfksjbglsbdfsdbfksdbfgkjsbdkgbskdbfsdbfsd";
inline constexpr const char* kCampingStatement =
    "My name is Jin Kazama and I am in Pune, get 30% off on this bottle but you'll have to sign up first or "
    "you'll miss it, let's go have camping together";

// Reference percentages in canonical order. The rows are rounded and do not
// all sum to exactly 100, so they go through normalized().
inline darkscan::CategoryDistribution percent_row(darkscan::CategoryDistribution::Probabilities pct) {
    return darkscan::CategoryDistribution::normalized(pct);
}

inline darkscan::CategoryDistribution shoes_distribution() {
    return percent_row({1.74, 5.83, 54.21, 1.43, 0.52, 2.75, 31.51, 2.01});
}
inline darkscan::CategoryDistribution hurry_distribution() {
    return percent_row({0.23, 0.29, 0.24, 0.29, 98.09, 0.24, 0.26, 0.35});
}
inline darkscan::CategoryDistribution subscribe_distribution() {
    return percent_row({2.07, 47.84, 39.92, 3.90, 0.49, 2.92, 0.94, 1.92});
}
inline darkscan::CategoryDistribution camping_distribution() {
    return percent_row({2.01, 69.15, 20.86, 2.60, 0.86, 2.14, 1.66, 0.73});
}

}  // namespace testing
