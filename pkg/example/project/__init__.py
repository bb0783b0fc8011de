# Example Django project settings
