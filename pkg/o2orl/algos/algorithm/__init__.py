# pylint: disable = missing-module-docstring
from o2orl.algos.algorithm.cql import CQL, cql_penalty
from o2orl.algos.algorithm.inac import InAC, UpdateMode
from o2orl.algos.algorithm.iql import IQL, expectile_loss
from o2orl.algos.algorithm.pex import PEX, offline_probability, pex_select_action
from o2orl.algos.algorithm.proto import PROTO
from o2orl.algos.algorithm.sac import SAC
