"""factordb: factorised representations of select-project-join query results.

Results are stored as nested sums and products of identified tuples, built
along factorisation trees (f-trees) whose shape is chosen to minimise an
exponent f derived from fractional edge covers.
"""

from .errors import (FactorDBError, FormatError, IntegrityError, InvalidTree,
                     QuerySyntaxError, SchemaError, SizeExceeded, UnsatisfiableQuery)
from .reldata import Database, Relation, load_csv, load_database, relation_from_values
from .query import Query, make_query, parse_query, is_hierarchical, split_constants
from .frep import (EMPTY, Leaf, Prod, Sum, enumerate_tuples, equivalent, flatten,
                   parse_text, polynomial, read_k, size, to_text)
from .ftree import attach_leaves, is_valid, iter_ftrees, iter_pruned, node_sets
from .cover import dual_max_independent, f_of_query, f_of_tree, restricted_query, rho_star
from .gen import factorise, gen2, gen_naive, sort_for_tree
from .bounds import (brute_force_eval, build_crown_factorisation, build_pn_factorisation,
                     lower_bound_db, occurrence_oracle, witness_db_nonhierarchical)

__version__ = "0.1.0"
