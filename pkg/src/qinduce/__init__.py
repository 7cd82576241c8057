"""qinduce: induced corepresentations of finite quantum groups.

Multi-matrix *-algebras, weights/GNS/modular theory, finite quantum groups,
actions and their unitary implementations, the induced corepresentation
pipeline with numerical certificates, the weight correspondence, a catalog of
classical and cocommutative examples, a CLI and a FastAPI service.
"""

__version__ = "0.1.0"
