#pragma once

#include <vector>

namespace clustersync {

/// Partition of the node set {0..N-1} into p disjoint, covering, nonempty
/// clusters. Node indices are 0-based internally (scenario files use 1-based
/// ids and are converted on load).
class ClusterPartition {
public:
    ClusterPartition(int node_count, std::vector<std::vector<int>> clusters);

    int node_count() const { return node_count_; }
    int cluster_count() const { return static_cast<int>(clusters_.size()); }
    const std::vector<int>& cluster(int l) const { return clusters_.at(l); }
    const std::vector<std::vector<int>>& clusters() const { return clusters_; }

    /// Index of the cluster that node i belongs to.
    int cluster_of(int node) const { return cluster_of_.at(node); }
    bool same_cluster(int i, int j) const { return cluster_of(i) == cluster_of(j); }
    int cluster_size(int l) const { return static_cast<int>(clusters_.at(l).size()); }

private:
    int node_count_;
    std::vector<std::vector<int>> clusters_;
    std::vector<int> cluster_of_;
};

}  // namespace clustersync
