# Example project for django-catequiv
