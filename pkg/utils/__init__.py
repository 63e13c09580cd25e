# utils/__init__.py
# Tom fil för att göra utils till en Python-modul
