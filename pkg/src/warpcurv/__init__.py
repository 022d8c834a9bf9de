"""Curvature of warped products with a semi-symmetric non-metric connection.

Modules:

* ``expr``      -- expression parser and order-2 forward-mode jets
* ``geometry``  -- chart metrics, Christoffel symbols, curvature, calculus
* ``ssnm``      -- semi-symmetric non-metric connections
* ``warped``    -- warped products and their curvature decompositions
* ``einstein``  -- quasi-Einstein defects, fitting and factor equations
* ``manifest``, ``catalog``, ``suite``, ``cli`` -- verification plumbing
"""

__version__ = "0.1.0"
