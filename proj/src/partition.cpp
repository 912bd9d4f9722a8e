#include "clustersync/partition.hpp"

#include <stdexcept>
#include <string>

namespace clustersync {

ClusterPartition::ClusterPartition(int node_count, std::vector<std::vector<int>> clusters)
    : node_count_(node_count), clusters_(std::move(clusters)), cluster_of_(node_count, -1) {
    if (node_count_ <= 0) throw std::invalid_argument("partition: node count must be positive");
    if (clusters_.empty()) throw std::invalid_argument("partition: need at least one cluster");
    for (int l = 0; l < static_cast<int>(clusters_.size()); ++l) {
        if (clusters_[l].empty())
            throw std::invalid_argument("partition: cluster " + std::to_string(l) + " is empty");
        for (int node : clusters_[l]) {
            if (node < 0 || node >= node_count_)
                throw std::invalid_argument("partition: node index " + std::to_string(node) +
                                            " out of range");
            if (cluster_of_[node] != -1)
                throw std::invalid_argument("partition: node " + std::to_string(node) +
                                            " appears in two clusters");
            cluster_of_[node] = l;
        }
    }
    for (int i = 0; i < node_count_; ++i) {
        if (cluster_of_[i] == -1)
            throw std::invalid_argument("partition: node " + std::to_string(i) +
                                        " not covered by any cluster");
    }
}

}  // namespace clustersync
