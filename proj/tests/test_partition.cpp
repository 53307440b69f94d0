#include <gtest/gtest.h>

#include "grlol/errors.hpp"
#include "grlol/partition.hpp"

namespace {
using namespace grlol;

TEST(Partition, FromGroups) {
  Partition part = Partition::from_groups({{4, 0}, {2}, {1, 3, 5}}, 6);
  EXPECT_EQ(part.k(), 6);
  EXPECT_EQ(part.p(), 3);
  EXPECT_EQ(part.t_star(), 3);
  EXPECT_EQ(part.group_of()[4], 0);
  EXPECT_EQ(part.rank_of()[4], 0);
  EXPECT_EQ(part.rank_of()[0], 1);
  EXPECT_EQ(part.group_of()[5], 2);
  EXPECT_EQ(part.rank_of()[5], 2);
  EXPECT_EQ(part.size_of(1), 1);
  EXPECT_DOUBLE_EQ(part.mean_group_size(), 2.0);
  EXPECT_EQ(part.members({2, 0}), (IndexSet{1, 3, 5, 4, 0}));
}

TEST(Partition, Singletons) {
  Partition part = Partition::singletons(4);
  EXPECT_EQ(part.p(), 4);
  EXPECT_EQ(part.t_star(), 1);
  for (Index l = 0; l < 4; ++l) {
    EXPECT_EQ(part.group_of()[l], l);
    EXPECT_EQ(part.rank_of()[l], 0);
  }
}

TEST(Partition, RejectsInvalid) {
  EXPECT_THROW(Partition::from_groups({{0, 1}, {1, 2}}, 3), Error);
  EXPECT_THROW(Partition::from_groups({{0, 1}}, 3), Error);
  EXPECT_THROW(Partition::from_groups({{0, 1}, {}, {2}}, 3), Error);
  EXPECT_THROW(Partition::from_groups({{0, 3}}, 2), Error);
}
} // namespace
