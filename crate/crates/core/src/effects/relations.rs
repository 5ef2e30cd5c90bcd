use crate::chart::{ChartDocument, GraphicalElement};
use serde::{Deserialize, Serialize};

/// Pairwise contact and common-region relations, indexed like the element
/// list they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipMatrices {
    pub contact: Vec<Vec<u8>>,
    pub region: Vec<Vec<u8>>,
    pub gap_tolerance: f64,
}

impl RelationshipMatrices {
    pub fn len(&self) -> usize {
        self.contact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contact.is_empty()
    }

    pub fn contact_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.contact[i]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(j, _)| j)
    }

    /// Whether the subgraph of the contact graph induced by `members` is connected.
    pub fn contact_connected(&self, members: &[usize]) -> bool {
        let Some(&start) = members.first() else {
            return true;
        };
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &j in members {
                if self.contact[i][j] == 1 && !seen.contains(&j) {
                    seen.push(j);
                    stack.push(j);
                }
            }
        }
        seen.len() == members.len()
    }
}

/// Relations over every element of `doc`, gap tolerance 1% of the canvas diagonal.
pub fn build_relationship_matrices(doc: &ChartDocument) -> RelationshipMatrices {
    let elements: Vec<&GraphicalElement> = doc.elements.iter().collect();
    relationship_matrices_for(&elements, 0.01 * doc.canvas_diagonal())
}

pub fn relationship_matrices_for(
    elements: &[&GraphicalElement],
    gap_tolerance: f64,
) -> RelationshipMatrices {
    let n = elements.len();
    let expanded: Vec<_> = elements.iter().map(|e| e.bbox.expand(gap_tolerance)).collect();
    let mut contact = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if elements[i].hidden || elements[j].hidden {
                continue;
            }
            if expanded[i].intersects(&expanded[j]) {
                contact[i][j] = 1;
                contact[j][i] = 1;
            }
        }
    }

    let containers: Vec<Option<usize>> = (0..n).map(|i| innermost_container(elements, i)).collect();
    let mut region = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if containers[i] == containers[j] {
                region[i][j] = 1;
                region[j][i] = 1;
            }
        }
    }
    RelationshipMatrices {
        contact,
        region,
        gap_tolerance,
    }
}

/// Smallest visible closed element whose bbox strictly contains element `i`'s;
/// `None` stands for the canvas.
fn innermost_container(elements: &[&GraphicalElement], i: usize) -> Option<usize> {
    let target = &elements[i].bbox;
    elements
        .iter()
        .enumerate()
        .filter(|(k, c)| *k != i && c.closed && !c.hidden && c.bbox.strictly_contains(target))
        .min_by(|(ka, a), (kb, b)| {
            a.bbox
                .area()
                .total_cmp(&b.bbox.area())
                .then(ka.cmp(kb))
        })
        .map(|(k, _)| k)
}
