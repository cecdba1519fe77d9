#pragma once

#include <string>
#include <vector>

#include "fsr/subdivision.hpp"

namespace fsr {

// Compact construction of rules from string ids. Walks are written as "a+ b- c+".
class RuleBuilder {
 public:
  explicit RuleBuilder(std::string name);

  RuleBuilder& vertex0(const std::string& id, bool marked = false);
  RuleBuilder& edge0(const std::string& id, const std::string& tail, const std::string& head);
  RuleBuilder& tile0(const std::string& id, const std::string& walk);

  // Carrier specs are "v:<id>", "e:<id>" or "t:<id>"; edge images are "<id>+" or "<id>-".
  RuleBuilder& vertex1(const std::string& id, const std::string& carrier, const std::string& image);
  RuleBuilder& edge1(const std::string& id, const std::string& tail, const std::string& head,
                     const std::string& carrier, const std::string& image);
  RuleBuilder& tile1(const std::string& id, const std::string& walk, const std::string& carrier,
                     const std::string& image, int alignment = 0);
  RuleBuilder& meta(const std::string& key, const std::string& value);

  SubdivisionRule build() const;

 private:
  SubdivisionRule r_;
  std::vector<std::string> vcar_, ecar_, tcar_, vimg_, eimg_, timg_;
  std::vector<int> talign_;
};

std::vector<Side> parse_walk(const SphereComplex& cx, const std::string& walk);

SubdivisionRule power_spider_2();
SubdivisionRule doubling_edge();
SubdivisionRule levy_bigon();
SubdivisionRule tri_example_fig4();
SubdivisionRule julia_slit();
// Real-line model of z^2 - 1 with the fixed points alpha, beta and the point -alpha as vertices.
SubdivisionRule basilica_real();
// z -> z^d with m radial legs; with unit points each leg carries a vertex on the unit circle.
SubdivisionRule radial_spider(int d, int m, bool unit_points);

std::vector<SubdivisionRule> catalog();
SubdivisionRule catalog_rule(const std::string& name);

}  // namespace fsr
