import pytest
from hypothesis import settings

from univoque.plateaux import build_tree

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# path of the level-one plateau generated by 1110 in the M=1 tree truncated at length 8
NODE_1110 = "18"


@pytest.fixture(scope="session")
def tree1():
    return build_tree(1, max_word_len=8)


@pytest.fixture(scope="session")
def node_1110(tree1):
    node = tree1.node(NODE_1110)
    assert str(node.generating_word) == "1110"
    return node
