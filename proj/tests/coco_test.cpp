#include <gtest/gtest.h>

#include "optionkb/coco.hpp"
#include "optionkb/store.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"

using namespace optionkb;
using coco::IngestError;

namespace {

IngestError::Kind error_kind(auto&& fn) {
  try {
    fn();
  } catch (const IngestError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected IngestError";
  return IngestError::Kind::InvalidProvenance;
}

}  // namespace

TEST(ParseInfo, FixtureARecord) {
  auto recs = coco::parse_info(testkit::kFixtureInfo);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_EQ(r.func_id, 1);
  EXPECT_EQ(r.dim, 5);
  EXPECT_DOUBLE_EQ(r.precision, 1.0e-8);
  EXPECT_EQ(r.alg_id, "ALG1");
  EXPECT_EQ(r.data_path, "data_f1/ALG1_f1_DIM5.dat");
  EXPECT_EQ(r.trials, (std::vector<coco::TrialSummary>{{1, 12, 0.34}, {2, 20, 9.9e-9}}));
}

TEST(ParseInfo, EmptyInput) { EXPECT_TRUE(coco::parse_info("").empty()); }

TEST(ParseInfo, MissingAlgIdIsMissingField) {
  try {
    coco::parse_info("funcId = 1, DIM = 5, Precision = 1e-8\nx.dat, 1:1|1\n");
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_EQ(e.kind(), IngestError::Kind::MissingField);
    EXPECT_EQ(e.detail(), "algId");
  }
}

TEST(ParseInfo, ExtraHeaderKeysWarn) {
  std::vector<std::string> warnings;
  auto recs = coco::parse_info(
      "suite = 'bbob',  funcId = 3 ,DIM=2, Precision = 1.000e-08, algId = 'A, B', coco_version = '2.3'\n"
      "data/a.dat, 1:10|1.0e+00, 2:11|2e-1,\n",
      &warnings);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].alg_id, "A, B");
  EXPECT_EQ(recs[0].func_id, 3);
  EXPECT_EQ(recs[0].trials.size(), 2u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(ParseInfo, MultipleRecords) {
  auto recs = coco::parse_info(
      "funcId = 1, DIM = 2, Precision = 1e-8, algId = 'X'\n% c\nd1.dat, 1:3|0.5\n"
      "funcId = 1, DIM = 3, Precision = 1e-8, algId = 'X'\nd2.dat, 1:4|0.25, 3:9|0.125\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].dim, 3);
  EXPECT_EQ(recs[1].trials.back().instance, 3);
}

TEST(ParseInfo, StructuralErrors) {
  EXPECT_EQ(error_kind([] { coco::parse_info("funcId = 1, DIM = 2, Precision = 1e-8, algId = 'X'\n"); }),
            IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] { coco::parse_info("d.dat, 1:1|1\n"); }), IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] { coco::parse_info("funcId = 1, DIM = 2, Precision = 1e-8, algId = 'X'\nd.dat, 1:1\n"); }),
            IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] {
              coco::parse_info("funcId = 1, DIM = 2, Precision = 1e-8, algId = 'X'\nd.dat, 1:1|1, 1:2|0.5\n");
            }),
            IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] { coco::parse_info("funcId = 0, DIM = 2, Precision = 1e-8, algId = 'X'\nd.dat\n"); }),
            IngestError::Kind::SyntaxError);
}

TEST(ParseDat, FixtureARuns) {
  auto runs = coco::parse_dat(testkit::kFixtureDat);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].rows, (std::vector<coco::EventRow>{{1, 25.0, 25.0}, {5, 1.0, 1.0}, {12, 0.34, 0.34}}));
  ASSERT_TRUE(runs[0].fopt.has_value());
  EXPECT_DOUBLE_EQ(*runs[0].fopt, 79.48);
  EXPECT_EQ(runs[1].rows, (std::vector<coco::EventRow>{{1, 5.0, 5.0}, {20, 9.9e-9, 9.9e-9}}));
}

TEST(ParseDat, HeaderWithoutRowsIsSyntaxError) {
  EXPECT_EQ(error_kind([] { coco::parse_dat("% header (1.0)\n"); }), IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] { coco::parse_dat("% a\n% b\n1 1 1\n"); }), IngestError::Kind::SyntaxError);
}

TEST(ParseDat, RepeatedEvalsIsNonMonotone) {
  try {
    coco::parse_dat("% h\n1 2 2\n5 1 1\n5 0.5 0.5\n");
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_EQ(e.kind(), IngestError::Kind::NonMonotoneEvals);
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ParseDat, RisingBestDeltaStrictVsLenient) {
  const char* text = "% h\n1 2 2\n2 3 3\n3 1 1\n";
  EXPECT_EQ(error_kind([&] { coco::parse_dat(text, coco::Mode::Strict); }), IngestError::Kind::NonMonotoneBestDelta);
  std::vector<std::string> warnings;
  auto runs = coco::parse_dat(text, coco::Mode::Lenient, &warnings);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].rows[1].best_delta, 2.0);
  EXPECT_EQ(runs[0].rows[1].delta, 3.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ParseDat, HeaderWithoutFoptAndExtraColumns) {
  auto runs = coco::parse_dat("% no optimum here\n1 2 2 9 9 0.1 0.2\n1e+01 1 1\n");
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_FALSE(runs[0].fopt.has_value());
  EXPECT_EQ(runs[0].rows.back().evals, 10);
}

TEST(ParseDat, RejectsShortOrGarbageRows) {
  EXPECT_EQ(error_kind([] { coco::parse_dat("% h\n1 2\n"); }), IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] { coco::parse_dat("% h\n1 x 2\n"); }), IngestError::Kind::SyntaxError);
  EXPECT_EQ(error_kind([] { coco::parse_dat("1 1 1\n"); }), IngestError::Kind::SyntaxError);
}

TEST(Annotate, EncodesIriComponents) {
  EXPECT_EQ(coco::encode_iri_component("BIPOP-CMA-ES_v1.2"), "BIPOP-CMA-ES_v1.2");
  EXPECT_EQ(coco::encode_iri_component("a b/c"), "a%20b%2Fc");
  EXPECT_EQ(coco::encode_iri_component("10.1145/3449726"), "10.1145%2F3449726");
  EXPECT_EQ(coco::encode_iri_component("\xC3\xA9"), "%C3%A9");
}

TEST(Annotate, FixtureAYieldsFortyEightQuads) {
  auto quads = testkit::fixture_a_quads();
  // 2 algorithm + 2 problem + (4 + 1) study + 2 x 7 run + (3 + 2) x 5 event
  EXPECT_EQ(quads.size(), 48u);
  for (const auto& q : quads) EXPECT_EQ(q.graph.value(), testkit::kAlgGraph);
  EXPECT_EQ(quads.front().subject.value(), "urn:option:alg/ALG1");
  EXPECT_EQ(quads.front().object.value(), "urn:option:vocab#OptimizationAlgorithm");
}

TEST(Annotate, FixtureAGolden) {
  auto text = rdf::serialize_nquads(testkit::fixture_a_quads());
  auto golden = store::read_file(testkit::fixture_root() / "fixture_a.nq");
  EXPECT_EQ(text, golden);
}

TEST(Annotate, IsDeterministicAndIdempotentInStore) {
  auto a = testkit::fixture_a_quads();
  auto b = testkit::fixture_a_quads();
  EXPECT_EQ(a, b);
  store::QuadStore st;
  st.bulk_insert(a);
  auto second = st.bulk_insert(b);
  EXPECT_EQ(st.count(), 48u);
  EXPECT_EQ(second.duplicates, 48u);
}

TEST(Annotate, PairingMismatch) {
  auto infos = coco::parse_info(testkit::kFixtureInfo);
  auto runs = coco::parse_dat(testkit::kFixtureDat);
  runs.pop_back();
  EXPECT_EQ(error_kind([&] { coco::annotate(infos, {runs}, testkit::fixture_provenance()); }),
            IngestError::Kind::PairingMismatch);
}

TEST(Annotate, OmitsFoptWhenAbsentAndCountsAuthors) {
  auto infos = coco::parse_info("funcId = 2, DIM = 3, Precision = 1e-8, algId = 'X'\nd.dat, 1:2|0.5\n");
  auto runs = coco::parse_dat("% no optimum\n1 1 1\n2 0.5 0.5\n");
  coco::ProvenanceRecord prov{"10.1/y", "Title", {"B", "A", "C"}, 2017};
  auto quads = coco::annotate(infos, {runs}, prov);
  // 2 + 2 + (4 + 3) + 6 + 2 x 5
  EXPECT_EQ(quads.size(), 27u);
}

TEST(Annotate, RejectsInvalidProvenance) {
  auto infos = coco::parse_info(testkit::kFixtureInfo);
  auto runs = coco::parse_dat(testkit::kFixtureDat);
  for (auto prov : {coco::ProvenanceRecord{"", "T", {"A"}, 2016}, coco::ProvenanceRecord{"d", "", {"A"}, 2016},
                    coco::ProvenanceRecord{"d", "T", {}, 2016}, coco::ProvenanceRecord{"d", "T", {"A"}, 1989},
                    coco::ProvenanceRecord{"d", "T", {"A"}, 2101}}) {
    EXPECT_EQ(error_kind([&] { coco::annotate(infos, {runs}, prov); }), IngestError::Kind::InvalidProvenance);
  }
}

TEST(Annotate, DuplicateRunKeyWarnsAndMergesRows) {
  auto infos = coco::parse_info(
      "funcId = 1, DIM = 2, Precision = 1e-8, algId = 'X'\na.dat, 1:2|0.5\n"
      "funcId = 1, DIM = 2, Precision = 1e-8, algId = 'X'\nb.dat, 1:3|0.25\n");
  auto a = coco::parse_dat("% (1)\n1 1 1\n2 0.5 0.5\n");
  auto b = coco::parse_dat("% (1)\n1 1 1\n3 0.25 0.25\n");
  std::vector<std::string> warnings;
  auto quads = coco::annotate(infos, {a, b}, testkit::fixture_provenance(), coco::kDefaultBase, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  // 2 + 2 + 5 + 7 + events {1, 2, 3} x 5
  EXPECT_EQ(quads.size(), 31u);
}

TEST(Annotate, QuadCountLawOnGeneratedCorpus) {
  testkit::Rng rng(3);
  testkit::TempDir dir;
  testkit::CorpusSpec spec{3, 2, {2, 5}, 3, 10};
  testkit::write_corpus(dir.path(), spec, rng);
  coco::ProvenanceRecord prov{"10.1/z", "Z", {"P", "Q"}, 2015};
  auto result = coco::ingest_directory(dir.path(), prov);
  std::size_t rows = 0, runs = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
    if (entry.path().extension() != ".dat") continue;
    for (const auto& run : coco::parse_dat(store::read_file(entry.path()))) {
      ++runs;
      rows += run.rows.size();
    }
  }
  std::size_t algorithms = 3, problems_per_graph = 2, studies_per_graph = 1;
  std::size_t expected = 2 * algorithms + 2 * problems_per_graph * algorithms +
                         (4 + prov.authors.size()) * studies_per_graph * algorithms + 7 * runs + 5 * rows;
  EXPECT_EQ(result.quads.size(), expected);
  EXPECT_EQ(result.report.runs_annotated, runs);
  EXPECT_TRUE(result.report.warnings.empty());
}

TEST(IngestDirectory, FixtureA) {
  auto result = coco::ingest_directory(testkit::fixture_a_dir(), testkit::fixture_provenance());
  EXPECT_EQ(result.quads.size(), 48u);
  EXPECT_EQ(result.report.files_parsed, 2u);
  EXPECT_EQ(result.report.runs_annotated, 2u);
  EXPECT_EQ(result.report.quads_emitted, 48u);
  EXPECT_TRUE(result.report.warnings.empty());
  EXPECT_EQ(result.quads, testkit::fixture_a_quads());
}

TEST(IngestDirectory, EmptyDirectory) {
  testkit::TempDir dir;
  auto result = coco::ingest_directory(dir.path(), testkit::fixture_provenance());
  EXPECT_TRUE(result.quads.empty());
  EXPECT_EQ(result.report.files_parsed, 0u);
}

TEST(IngestDirectory, MissingRootIsIoError) {
  EXPECT_THROW(coco::ingest_directory("/nonexistent/optionkb", testkit::fixture_provenance()), store::IoError);
}

TEST(IngestDirectory, MissingDatFileIsIoError) {
  testkit::TempDir dir;
  testkit::write_text(dir.path() / "A.info", testkit::kFixtureInfo);
  EXPECT_THROW(coco::ingest_directory(dir.path(), testkit::fixture_provenance()), store::IoError);
}

TEST(IngestDirectory, PerturbedSummaryWarnsOnce) {
  testkit::TempDir dir;
  std::string info = testkit::kFixtureInfo;
  info.replace(info.find("2:20|9.9e-09"), 12, "2:20|9.8e-09");
  testkit::write_text(dir.path() / "ALG1.info", info);
  testkit::write_text(dir.path() / "data_f1" / "ALG1_f1_DIM5.dat", testkit::kFixtureDat);
  auto result = coco::ingest_directory(dir.path(), testkit::fixture_provenance());
  ASSERT_EQ(result.report.warnings.size(), 1u);
  const auto& w = result.report.warnings[0];
  EXPECT_NE(w.find("instance 2"), std::string::npos) << w;
  EXPECT_NE(w.find("9.8e-09"), std::string::npos) << w;
  EXPECT_NE(w.find("9.9e-09"), std::string::npos) << w;
  EXPECT_EQ(result.quads.size(), 48u);
}

TEST(IngestDirectory, ParseErrorsCarryFileContext) {
  testkit::TempDir dir;
  testkit::write_text(dir.path() / "ALG1.info", testkit::kFixtureInfo);
  testkit::write_text(dir.path() / "data_f1" / "ALG1_f1_DIM5.dat", "% h (1)\n1 2 2\n1 1 1\n% h\n1 1 1\n");
  try {
    coco::ingest_directory(dir.path(), testkit::fixture_provenance());
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_EQ(e.kind(), IngestError::Kind::NonMonotoneEvals);
    EXPECT_NE(e.file().find("ALG1_f1_DIM5.dat"), std::string::npos);
  }
}

TEST(IngestDirectory, StrictModeRejectsRisingBestDelta) {
  testkit::TempDir dir;
  testkit::write_text(dir.path() / "A.info", "funcId = 1, DIM = 2, Precision = 1e-8, algId = 'A'\nd.dat, 1:3|1\n");
  testkit::write_text(dir.path() / "d.dat", "% h\n1 1 1\n2 2 2\n3 1 1\n");
  EXPECT_THROW(coco::ingest_directory(dir.path(), testkit::fixture_provenance(), {coco::Mode::Strict}), IngestError);
  auto lenient = coco::ingest_directory(dir.path(), testkit::fixture_provenance(), {coco::Mode::Lenient});
  EXPECT_EQ(lenient.report.warnings.size(), 1u);
}
