"""residuap: a desk-scale workbench for filtrations of finite groups,
modular group algebras, wreath-product amalgamation, graphs of groups and
residually-p certification."""

__version__ = "0.1.0"
