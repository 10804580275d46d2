#include <doctest.h>

#include <vector>

#include "trafusion/section_average.hpp"

using namespace trafusion;

namespace {

std::vector<LoopRecord> constant_detector(const std::string& id, double x, double v,
                                          const GridSpec& g) {
  std::vector<LoopRecord> out;
  for (std::size_t j = 0; j < g.n_t(); ++j) out.push_back({id, x, g.t_lower(j), v});
  return out;
}

}  // namespace

TEST_CASE("section borders at detector midpoints") {
  const GridSpec g(0.0, 5000.0, 0.0, 600.0);
  const std::vector<double> two{1000.0, 3000.0};
  CHECK(define_sections(two, g).boundaries == std::vector<double>{0.0, 2000.0, 5000.0});

  const std::vector<double> one{1234.0};
  CHECK(define_sections(one, g).section_count() == 1);

  const GridSpec small(0.0, 200.0, 0.0, 600.0);
  const std::vector<double> three{0.0, 100.0, 200.0};
  CHECK(define_sections(three, small).boundaries == std::vector<double>{0.0, 50.0, 150.0, 200.0});

  SectionWarnings warn;
  const auto none = define_sections(std::vector<double>{}, g, &warn);
  CHECK(none.section_count() == 1);
  CHECK(warn.no_detectors);

  const auto p = define_sections(two, g);
  CHECK(p.section_of(0.0) == 0);
  CHECK(p.section_of(1999.9) == 0);
  CHECK(p.section_of(2000.0) == 1);
  CHECK(p.section_of(5000.0) == 1);
}

TEST_CASE("single detector fills the whole field") {
  const GridSpec g(0.0, 3000.0, 0.0, 600.0);
  const auto recs = constant_detector("a", 1500.0, 20.0, g);
  const std::vector<double> pos{1500.0};
  const SpeedField f = section_average_loop(recs, define_sections(pos, g), g);
  for (double v : f.values().data()) CHECK(v == 20.0);
}

TEST_CASE("missing minute takes the nearest, earlier on ties") {
  const GridSpec g(0.0, 1000.0, 0.0, 300.0);
  const std::vector<LoopRecord> recs{{"a", 500.0, 0.0, 10.0},
                                     {"a", 500.0, 60.0, 11.0},
                                     {"a", 500.0, 180.0, 13.0},
                                     {"a", 500.0, 240.0, 14.0}};
  const std::vector<double> pos{500.0};
  const SpeedField f = section_average_loop(recs, define_sections(pos, g), g);
  CHECK(f.speed(3, 2) == 11.0);
  CHECK(f.speed(7, 4) == 14.0);
}

TEST_CASE("two detectors give a step at the midpoint") {
  const GridSpec g(0.0, 4000.0, 0.0, 300.0);
  auto recs = constant_detector("a", 1000.0, 10.0, g);
  const auto b = constant_detector("b", 3000.0, 30.0, g);
  recs.insert(recs.end(), b.begin(), b.end());
  const std::vector<double> pos{1000.0, 3000.0};
  const SpeedField f = section_average_loop(recs, define_sections(pos, g), g);
  for (std::size_t j = 0; j < g.n_t(); ++j) {
    CHECK(f.speed(19, j) == 10.0);
    CHECK(f.speed(20, j) == 30.0);
    for (std::size_t i = 0; i < 20; ++i) CHECK(f.speed(i, j) == 10.0);
    for (std::size_t i = 20; i < g.n_x(); ++i) CHECK(f.speed(i, j) == 30.0);
  }
}

TEST_CASE("silent detector copies its nearest reporting neighbour") {
  const GridSpec g(0.0, 3000.0, 0.0, 300.0);
  const auto recs = constant_detector("a", 500.0, 12.0, g);
  const std::vector<double> pos{500.0, 2500.0};
  SectionWarnings warn;
  const SpeedField f = section_average_loop(recs, define_sections(pos, g), g, {}, {}, &warn);
  CHECK(f.speed(29, 0) == 12.0);
  CHECK(warn.silent_detectors.size() == 1);
}

TEST_CASE("trace sections: constant trace") {
  const GridSpec g(0.0, 4000.0, 0.0, 600.0);
  FcdTrace tr{"t", {}};
  for (int k = 0; k <= 10; ++k) tr.samples.push_back({10.0 * k, 20.0 * 10.0 * k});
  const std::vector<double> pos{1000.0, 3000.0};
  const std::vector traces{tr};
  const SpeedField f = section_average_traces(traces, define_sections(pos, g), g);
  CHECK(f.speed(5, 0) == doctest::Approx(20.0));
  CHECK(f.speed(5, 1) == doctest::Approx(20.0));
}

TEST_CASE("trace sections: distance over time of all pieces") {
  const GridSpec g(0.0, 2000.0, 0.0, 120.0);
  const std::vector<double> pos{1000.0};
  const std::vector traces{FcdTrace{"a", {{0.0, 0.0}, {10.0, 100.0}}},
                           FcdTrace{"b", {{20.0, 500.0}, {30.0, 800.0}}}};
  const SpeedField f = section_average_traces(traces, define_sections(pos, g), g);
  CHECK(f.speed(0, 0) == doctest::Approx(20.0));
}

TEST_CASE("trace sections: single crossing is conserved") {
  const GridSpec g(0.0, 2000.0, 0.0, 120.0);
  const std::vector<double> pos{1000.0};
  const std::vector traces{FcdTrace{"a", {{0.0, 0.0}, {10.0, 100.0}, {40.0, 400.0}, {50.0, 1000.0}}}};
  const SpeedField f = section_average_traces(traces, define_sections(pos, g), g);
  CHECK(f.speed(0, 0) == doctest::Approx(1000.0 / 50.0));
}

TEST_CASE("trace sections: interpolation over empty steps") {
  const GridSpec g(0.0, 1000.0, 0.0, 180.0);
  const std::vector<double> pos{500.0};
  const std::vector traces{FcdTrace{"a", {{0.0, 0.0}, {10.0, 100.0}}},
                           FcdTrace{"b", {{120.0, 0.0}, {130.0, 300.0}}}};
  const SpeedField f = section_average_traces(traces, define_sections(pos, g), g);
  CHECK(f.speed(0, 0) == doctest::Approx(10.0));
  CHECK(f.speed(0, 1) == doctest::Approx(20.0));
  CHECK(f.speed(0, 2) == doctest::Approx(30.0));
}

TEST_CASE("never-crossed section uses the default fill speed") {
  const GridSpec g(0.0, 4000.0, 0.0, 120.0);
  const std::vector<double> pos{1000.0, 3000.0};
  const std::vector traces{FcdTrace{"a", {{0.0, 0.0}, {10.0, 100.0}}}};
  SectionWarnings warn;
  const SectionAverageParams params;
  const SpeedField f = section_average_traces(traces, define_sections(pos, g), g, params, {}, &warn);
  CHECK(f.speed(30, 0) == doctest::Approx(params.default_fill_speed));
  CHECK(warn.empty_sections == std::vector<std::size_t>{1});
}

TEST_CASE("BT samples act as straight trajectories") {
  const GridSpec g(0.0, 2000.0, 0.0, 120.0);
  const std::vector<double> receivers{0.0, 2000.0};
  const std::vector bt{BtSample{"a", 0.0, 2000.0, 0.0, 100.0}};
  const SpeedField f = section_average_traces(bt, define_sections(receivers, g), g);
  for (double v : f.values().data()) CHECK(v == doctest::Approx(20.0));
}

TEST_CASE("source combination is the arithmetic mean") {
  const GridSpec g(0.0, 200.0, 0.0, 60.0);
  const std::vector one{SpeedField::constant(g, 17.0)};
  CHECK(reconstruct_section_average(one).speed(0, 0) == 17.0);
  const std::vector two{SpeedField::constant(g, 20.0), SpeedField::constant(g, 40.0)};
  CHECK(reconstruct_section_average(two).speed(1, 0) == doctest::Approx(30.0));
  const std::vector three{SpeedField::constant(g, 10.0), SpeedField::constant(g, 20.0),
                          SpeedField::constant(g, 30.0)};
  CHECK(reconstruct_section_average(three).speed(0, 0) == doctest::Approx(20.0));
}
