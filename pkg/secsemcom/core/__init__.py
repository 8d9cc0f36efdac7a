"""Core package for application-wide utilities and configurations."""
