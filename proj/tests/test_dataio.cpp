#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chop/dataio.hpp"
#include "support.hpp"

using namespace chop;
using testing_support::TempDir;

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_double(2.5), "2.5");
  EXPECT_EQ(format_double(-0.0), "-0");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(*parse_double(format_double(v)), v);
  }
}

TEST(Format, ParseDouble) {
  EXPECT_EQ(parse_double(" 1.5 "), 1.5);
  EXPECT_EQ(parse_double("+2"), 2.0);
  EXPECT_FALSE(parse_double("abc"));
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double(""));
}

TEST(Csv, QuotedFieldsAndLineNumbers) {
  const auto recs = parse_csv("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n\"multi\nline\",2\nlast,3");
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[1].fields[0], "x,1");
  EXPECT_EQ(recs[1].fields[1], "say \"hi\"");
  EXPECT_EQ(recs[2].fields[0], "multi\nline");
  EXPECT_EQ(recs[2].line, 3u);
  EXPECT_EQ(recs[3].line, 5u);
}

TEST(Csv, CrLf) {
  const auto recs = parse_csv("a,b\r\n1,2\r\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].fields[1], "2");
}

TEST(LoadFeatures, CsvPoint) {
  TempDir d;
  write_file(d.file("p.csv"), "pid,x,y,v\na,0,0,1\n");
  const FeatureSet fs = load_features(d.file("p.csv"), "pid");
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].id, "a");
  EXPECT_EQ(std::get<Point>(fs[0].geometry), (Point{0, 0}));
  EXPECT_EQ(std::get<double>(fs[0].attributes.at("v")), 1.0);
  EXPECT_EQ(fs.columns, std::vector<std::string>{"v"});
}

TEST(LoadFeatures, CsvStringAttributeKeepsLeadingZeros) {
  TempDir d;
  write_file(d.file("p.csv"), "id,x,y,county\na,0,0,037001\nb,1,1,12\n");
  const FeatureSet fs = load_features(d.file("p.csv"), "id");
  EXPECT_EQ(std::get<std::string>(fs[0].attributes.at("county")), "037001");
  EXPECT_EQ(std::get<double>(fs[1].attributes.at("county")), 12.0);
}

TEST(LoadFeatures, CsvDuplicateId) {
  TempDir d;
  write_file(d.file("p.csv"), "id,x,y\na,0,0\nb,1,1\na,2,2\n");
  try {
    load_features(d.file("p.csv"), "id");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
    EXPECT_EQ(e.line, 4u);
  }
}

TEST(LoadFeatures, CsvMissingIdAndBadCoordinate) {
  TempDir d;
  write_file(d.file("a.csv"), "id,x,y\n,0,0\n");
  EXPECT_THROW(load_features(d.file("a.csv"), "id"), LoadError);
  write_file(d.file("b.csv"), "id,x,y\na,zero,0\n");
  EXPECT_THROW(load_features(d.file("b.csv"), "id"), LoadError);
  write_file(d.file("c.csv"), "id,x\na,0\n");
  EXPECT_THROW(load_features(d.file("c.csv"), "id"), LoadError);
}

TEST(LoadFeatures, MissingFile) { EXPECT_THROW(load_features("/nonexistent/x.csv", "id"), IoError); }

TEST(LoadFeatures, GeoJsonPolygon) {
  const std::string doc = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"id":"sq","v":3},
     "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]})";
  const FeatureSet fs = parse_features_geojson(doc, "id");
  ASSERT_EQ(fs.size(), 1u);
  const auto& p = std::get<Polygon>(fs[0].geometry);
  EXPECT_DOUBLE_EQ(polygon_area(p), 1.0);
  EXPECT_EQ(std::get<double>(fs[0].attributes.at("v")), 3.0);
}

TEST(LoadFeatures, GeoJsonRejectsMultiGeometry) {
  const std::string multi = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"id":"m"},
     "geometry":{"type":"MultiPoint","coordinates":[[0,0],[1,1]]}}]})";
  EXPECT_THROW(parse_features_geojson(multi, "id"), LoadError);
  const std::string coll = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"id":"g"},
     "geometry":{"type":"GeometryCollection","geometries":[]}}]})";
  EXPECT_THROW(parse_features_geojson(coll, "id"), LoadError);
}

TEST(LoadFeatures, GeoJsonDuplicateAndMissingId) {
  const std::string dup = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"id":"a"},"geometry":{"type":"Point","coordinates":[0,0]}},
    {"type":"Feature","properties":{"id":"a"},"geometry":{"type":"Point","coordinates":[1,1]}}]})";
  try {
    parse_features_geojson(dup, "id");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("/features/1"), std::string::npos);
  }
  const std::string missing = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[0,0]}}]})";
  EXPECT_THROW(parse_features_geojson(missing, "id"), LoadError);
}

TEST(SaveFeatures, RoundTripCsvAndGeoJson) {
  TempDir d;
  FeatureSet fs;
  fs.columns = {"v", "name"};
  fs.features.push_back({"a", Point{0.1 + 0.2, -3}, {{"v", 1.5}, {"name", std::string("x,y")}}});
  fs.features.push_back({"b", Point{1e-300, 7}, {{"v", 2.0}, {"name", std::string("z")}}});
  save_features(fs, d.file("a.csv"));
  const FeatureSet c = load_features(d.file("a.csv"), "id");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(std::get<Point>(c[0].geometry), (Point{0.1 + 0.2, -3}));
  EXPECT_EQ(std::get<std::string>(c[0].attributes.at("name")), "x,y");
  save_features(fs, d.file("a.geojson"));
  const FeatureSet g = load_features(d.file("a.geojson"), "id");
  EXPECT_EQ(std::get<Point>(g[1].geometry), (Point{1e-300, 7}));
  EXPECT_EQ(std::get<double>(g[1].attributes.at("v")), 2.0);

  FeatureSet polys;
  polys.features.push_back({"q", make_polygon(Ring{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}},
                                              {Ring{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}}}),
                            {}});
  save_features(polys, d.file("p.geojson"));
  const FeatureSet pg = load_features(d.file("p.geojson"), "id");
  EXPECT_DOUBLE_EQ(polygon_area(std::get<Polygon>(pg[0].geometry)), 15.0);
}

TEST(SaveTable, EmptyTableIsHeaderOnly) {
  TempDir d;
  ResultTable t({{"mean"}});
  save_table(t, d.file("t.csv"));
  EXPECT_EQ(read_file(d.file("t.csv")), "id,chunk_id,mean,error\n");
}

TEST(SaveTable, ErrorRowHasEmptyOutputs) {
  ResultTable t({{"mean"}, {"count", 0.0}});
  auto& ok = t.add_row("a", 0);
  ok.values[0] = 0.1 + 0.2;
  ok.values[1] = 3.0;
  t.append_row({"b", 1, {}, "boom, \"quoted\""});
  EXPECT_EQ(t.to_csv(), "id,chunk_id,mean,count,error\n"
                        "a,0,0.30000000000000004,3,\n"
                        "b,1,,,\"boom, \"\"quoted\"\"\"\n");
}

TEST(SaveTable, UnwritablePath) {
  EXPECT_THROW(save_table(ResultTable{}, "/nonexistent/dir/t.csv"), IoError);
}

TEST(AsciiGrid, SingleCell) {
  const Raster r = parse_ascii_grid("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n7\n");
  EXPECT_EQ(r.ncols, 1);
  EXPECT_EQ(r.nrows, 1);
  EXPECT_EQ(r.values, std::vector<double>{7});
  EXPECT_EQ(r.nodata, -9999);
}

TEST(AsciiGrid, CenterOriginAndCaseInsensitiveKeys) {
  const Raster r = parse_ascii_grid("NCOLS 2\nNROWS 1\nXLLCENTER 0.5\nYLLCENTER 0.5\nCELLSIZE 1\n1 2\n");
  EXPECT_EQ(r.xll, 0.0);
  EXPECT_EQ(r.yll, 0.0);
  EXPECT_EQ(r.nodata, -9999);
}

TEST(AsciiGrid, RoundTrip) {
  TempDir d;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-100, 100);
  Raster r;
  r.ncols = 7;
  r.nrows = 5;
  r.xll = 0.1 + 0.2;
  r.yll = -12.75;
  r.cellsize = 0.3;
  r.nodata = -3.5;
  for (int i = 0; i < 35; ++i) r.values.push_back(i % 6 == 0 ? r.nodata : u(rng));
  write_raster(r, d.file("r.asc"));
  EXPECT_EQ(load_raster(d.file("r.asc")), r);
  EXPECT_EQ(raster_to_ascii_grid(load_raster(d.file("r.asc"))), raster_to_ascii_grid(r));
}

TEST(AsciiGrid, ShortDataLineReportsLine) {
  try {
    parse_ascii_grid("ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n4 5\n");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line, 7u);
  }
}

TEST(AsciiGrid, MalformedHeader) {
  EXPECT_THROW(parse_ascii_grid("ncols\nnrows 1\n"), LoadError);
  EXPECT_THROW(parse_ascii_grid("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\n7\n"), LoadError);
  EXPECT_THROW(parse_ascii_grid("ncols 1\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n7\n"), LoadError);
  EXPECT_THROW(parse_ascii_grid("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nbanana 3\n7\n"), LoadError);
}

TEST(Partitions, RoundTrip) {
  TempDir d;
  PartitionSet ps;
  ps.mode = PartitionMode::grid;
  ps.padding = 0.1 + 0.2;
  ps.chunks.push_back({0, {0, 0, 1.1, 2.2}, {-0.2, -0.2, 1.4, 2.5}, {"a", "b"}});
  save_partitions(ps, d.file("p.json"));
  const PartitionSet back = load_partitions(d.file("p.json"));
  EXPECT_EQ(back.mode, ps.mode);
  EXPECT_EQ(back.padding, ps.padding);
  ASSERT_EQ(back.chunks.size(), 1u);
  EXPECT_EQ(back.chunks[0].core, ps.chunks[0].core);
  EXPECT_EQ(back.chunks[0].padded, ps.chunks[0].padded);
  EXPECT_EQ(back.chunks[0].member_ids, ps.chunks[0].member_ids);
  EXPECT_EQ(partitions_to_json(back), partitions_to_json(ps));
}

TEST(Partitions, SchemaErrorsNameJsonPath) {
  auto expect_path = [](const std::string& doc, const std::string& where) {
    try {
      parse_partitions(doc);
      FAIL() << doc;
    } catch (const LoadError& e) {
      EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
    }
  };
  expect_path(R"({"mode":"grid","padding":0,"chunks":[],"extra":1})", "/extra");
  expect_path(R"({"mode":"hex","padding":0,"chunks":[]})", "/mode");
  expect_path(R"({"mode":"grid","padding":-1,"chunks":[]})", "/padding");
  expect_path(R"({"mode":"grid","padding":0,"chunks":[{"chunk_id":0,"core":[0,0,1],"padded":[0,0,1,1]}]})",
              "/chunks/0/core");
  expect_path(R"({"mode":"grid","padding":0,"chunks":[{"chunk_id":0,"core":[0,0,1,1],"padded":[0,0,0.5,1]}]})",
              "/chunks/0/padded");
  expect_path(R"({"mode":"grid","padding":0,"chunks":[{"chunk_id":0,"core":[0,0,1,1],"padded":[0,0,1,1],
              "member_ids":[1]}]})",
              "/chunks/0/member_ids/0");
  expect_path("{not json", "invalid JSON");
}
