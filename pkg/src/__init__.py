# src/__init__.py
# Tom fil för att göra src till en Python-modul
