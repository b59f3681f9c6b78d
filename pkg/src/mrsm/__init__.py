"""MinRank solving by Support-Minors linearization, with a DAGS key-recovery front end."""

__version__ = "0.1.0"
