//! Static k-d tree over a fixed point set: median split on the
//! widest-spread axis, leaf size 16, read-only concurrent queries.

use crate::Vec3;

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Nearest-neighbor index over a point cloud. Distances are Euclidean in
/// R^3; equidistant candidates are ordered by lowest point index.
#[derive(Debug)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree {
    pub fn build(points: &[Vec3]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
            root: 0,
        };
        if !points.is_empty() {
            tree.root = tree.build_range(0, points.len());
        }
        tree
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        // Widest-spread axis over the range.
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for axis in 0..3 {
                lo[axis] = lo[axis].min(self.points[i][axis]);
                hi[axis] = hi[axis].max(self.points[i][axis]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap();

        let mid = (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            points[a][axis]
                .total_cmp(&points[b][axis])
                .then(a.cmp(&b))
        });
        let value = self.points[self.order[start + mid]][axis];
        let left = self.build_range(start, start + mid);
        let right = self.build_range(start + mid, end);
        self.nodes.push(Node::Split {
            axis,
            value,
            left,
            right,
        });
        self.nodes.len() - 1
    }

    /// Indices of the `k` nearest points to `query`, ascending by
    /// (distance, index).
    pub fn knn(&self, query: &Vec3, k: usize) -> Vec<usize> {
        assert!(k <= self.points.len(), "k exceeds point count");
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.search(self.root, query, k, &mut heap);
        heap.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        heap.into_iter().map(|(_, i)| i).collect()
    }

    fn search(&self, node: usize, query: &Vec3, k: usize, heap: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = (self.points[i] - query).norm_squared();
                    offer(heap, k, d2, i);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, k, heap);
                // The far side may hold an equidistant candidate with a lower
                // index, so prune only on strict inequality.
                if heap.len() < k || delta * delta <= heap_worst(heap).0 {
                    self.search(far, query, k, heap);
                }
            }
        }
    }
}

fn heap_worst(heap: &[(f64, usize)]) -> (f64, usize) {
    heap[0]
}

/// Binary max-heap on (distance^2, index) capped at `k` entries.
fn offer(heap: &mut Vec<(f64, usize)>, k: usize, d2: f64, idx: usize) {
    let worse = |a: (f64, usize), b: (f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).is_gt();
    if heap.len() == k && !worse(heap[0], (d2, idx)) {
        return;
    }
    heap.push((d2, idx));
    // Sift up.
    let mut i = heap.len() - 1;
    while i > 0 {
        let parent = (i - 1) / 2;
        if worse(heap[i], heap[parent]) {
            heap.swap(i, parent);
            i = parent;
        } else {
            break;
        }
    }
    if heap.len() > k {
        // Pop the root (worst candidate).
        let last = heap.len() - 1;
        heap.swap(0, last);
        heap.pop();
        let mut i = 0;
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut largest = i;
            if l < heap.len() && worse(heap[l], heap[largest]) {
                largest = l;
            }
            if r < heap.len() && worse(heap[r], heap[largest]) {
                largest = r;
            }
            if largest == i {
                break;
            }
            heap.swap(i, largest);
            i = largest;
        }
    }
}
