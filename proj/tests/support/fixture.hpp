#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "optionkb/coco.hpp"
#include "optionkb/store.hpp"

#ifndef OPTIONKB_FIXTURE_DIR
#error "OPTIONKB_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace optionkb::testkit {

inline std::filesystem::path fixture_root() { return std::filesystem::path(OPTIONKB_FIXTURE_DIR); }
inline std::filesystem::path fixture_a_dir() { return fixture_root() / "fixture_a"; }

inline const char* kFixtureInfo =
    "funcId = 1, DIM = 5, Precision = 1.000e-08, algId = 'ALG1'\n"
    "% synthetic fixture\n"
    "data_f1/ALG1_f1_DIM5.dat, 1:12|3.4e-01, 2:20|9.9e-09\n";

inline const char* kFixtureDat =
    "% function evaluation | noise-free fitness - Fopt (7.948000000000e+01) | best noise-free fitness - Fopt | "
    "measured fitness | best measured fitness\n"
    "1 2.5e+01 2.5e+01 1.044e+02 1.044e+02\n"
    "5 1.0e+00 1.0e+00 8.048e+01 8.048e+01\n"
    "12 3.4e-01 3.4e-01 7.982e+01 7.982e+01\n"
    "% function evaluation | noise-free fitness - Fopt (7.948000000000e+01) | best noise-free fitness - Fopt | "
    "measured fitness | best measured fitness\n"
    "1 5.0e+00 5.0e+00 8.448e+01 8.448e+01\n"
    "20 9.9e-09 9.9e-09 7.948e+01 7.948e+01\n";

inline coco::ProvenanceRecord fixture_provenance() { return {"10.1/x", "T", {"A. Author"}, 2016}; }

inline const char* kRunI1 = "urn:option:run/ALG1/f1/d5/i1";
inline const char* kRunI2 = "urn:option:run/ALG1/f1/d5/i2";
inline const char* kAlgGraph = "urn:option:alg/ALG1";

inline std::vector<rdf::Quad> fixture_a_quads() {
  auto infos = coco::parse_info(kFixtureInfo);
  auto runs = coco::parse_dat(kFixtureDat);
  return coco::annotate(infos, {runs}, fixture_provenance());
}

inline store::QuadStore fixture_a_store() {
  store::QuadStore st;
  st.bulk_insert(fixture_a_quads());
  return st;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / ("optionkb-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++) + "-" +
                      std::to_string(i));
      if (std::filesystem::create_directories(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace optionkb::testkit
