#ifndef SLEEPGEO_TESTS_PAPER_TABLES_HPP
#define SLEEPGEO_TESTS_PAPER_TABLES_HPP

// Published cross-validation confusion matrices used as metric fixtures,
// with the headline numbers reported alongside them (as fractions).

#include "sleepgeo/eval.hpp"

namespace sleepgeo::testing {

struct PublishedTable {
    const char* name;
    long long counts[5][5];
    double accuracy;
    double macro_f1; // negative = not reported
    double kappa;
};

inline const PublishedTable kPublishedTables[] = {
    {"SC-LOSOCV",
     {{6943, 184, 625, 156, 19},
      {112, 7063, 123, 419, 0},
      {378, 907, 967, 534, 18},
      {128, 1451, 412, 14557, 1251},
      {29, 16, 3, 545, 5110}},
     0.8257, 0.760, 0.763},
    {"SC-LOSOCV-extended-wake",
     {{15159, 339, 1572, 170, 45},
      {24, 7162, 133, 395, 3},
      {232, 829, 1180, 544, 19},
      {89, 1196, 636, 14553, 1325},
      {19, 3, 21, 499, 5161}},
     0.8421, 0.765, 0.788},
    {"ST-LOSOCV",
     {{2008, 40, 178, 42, 16},
      {59, 3489, 238, 334, 11},
      {548, 388, 697, 409, 2},
      {155, 514, 348, 7599, 877},
      {30, 2, 5, 654, 2454}},
     0.7701, 0.7153, 0.6813},
    {"SC-5fold",
     {{6857, 180, 732, 148, 10},
      {124, 6965, 184, 443, 1},
      {327, 873, 1032, 550, 22},
      {131, 1301, 528, 14517, 1322},
      {33, 13, 11, 512, 5134}},
     0.8225, 0.7589, 0.7591},
};

inline sleepgeo::ConfusionMatrix table_confusion(const PublishedTable& t) {
    sleepgeo::ConfusionMatrix cm;
    for (int p = 0; p < 5; ++p) {
        for (int q = 0; q < 5; ++q) cm.m(p, q) = t.counts[p][q];
    }
    return cm;
}

} // namespace sleepgeo::testing

#endif
