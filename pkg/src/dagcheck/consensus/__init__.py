from .node import Node, NodeSnapshot
from .vertex import Block, Vertex

__all__ = ["Node", "NodeSnapshot", "Block", "Vertex"]
